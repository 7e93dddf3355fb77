#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "coco/config.hpp"
#include "coco/errors.hpp"
#include "coco/experiments.hpp"

namespace {

struct SubcommandArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool out_set = false;
  std::vector<std::string> overrides;
};

int run(coco::ExperimentKind kind, const SubcommandArgs& args) {
  std::map<std::string, std::string> values;
  if (!args.config_path.empty()) {
    values = coco::parse_config_file(args.config_path);
    const auto kind_it = values.find("kind");
    if (kind_it != values.end()) {
      if (coco::kind_from_string(kind_it->second) != kind)
        throw coco::ConfigError("config file kind '" + kind_it->second +
                                "' does not match subcommand '" + coco::to_string(kind) + "'");
      values.erase(kind_it);
    }
  }
  for (const auto& token : args.overrides) coco::apply_override(values, token);
  if (args.seed_set) values["seed"] = std::to_string(args.seed);
  if (args.out_set) values["out"] = args.out_dir;

  const auto cfg = coco::ExperimentConfig::make(kind, values);
  const auto outputs = coco::run_experiment(cfg);
  for (const auto& out : outputs) std::cout << out.csv_path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"COCO denoiser experiment runner"};
  app.require_subcommand(1);

  std::vector<std::pair<coco::ExperimentKind, SubcommandArgs>> commands;
  commands.reserve(6);
  for (const auto kind :
       {coco::ExperimentKind::DenoiseOnce, coco::ExperimentKind::MseVsSigma,
        coco::ExperimentKind::MseElementwise, coco::ExperimentKind::Tightness,
        coco::ExperimentKind::Optimize, coco::ExperimentKind::WarmstartBench}) {
    commands.emplace_back(kind, SubcommandArgs{});
    auto& args = commands.back().second;
    auto* cmd = app.add_subcommand(coco::to_string(kind));
    cmd->add_option("--config", args.config_path, "key = value config file");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)")
        ->trigger_on_parse()
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)")
        ->trigger_on_parse()
        ->each([&args](const std::string&) { args.out_set = true; });
    cmd->add_option("overrides", args.overrides, "key=value overrides (win over the file)");
  }

  try {
    app.parse(argc, argv);
    for (const auto& [kind, args] : commands) {
      auto* cmd = app.get_subcommand(coco::to_string(kind));
      if (cmd->parsed()) return run(kind, args);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const coco::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const coco::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
