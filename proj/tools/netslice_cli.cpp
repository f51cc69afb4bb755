#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netslice/errors.hpp"
#include "netslice/experiment.hpp"
#include "netslice/format.hpp"

using namespace netslice;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string profile;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Replication seed (overrides the configuration)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--profile", o.profile, "Scale profile")->check(CLI::IsMember({"desk", "full"}));
}

json load_json(const CommonOptions& o) {
  json j = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
  }
  if (!o.profile.empty()) j["profile"] = o.profile;
  if (o.seed) j["seed"] = *o.seed;
  if (!o.out.empty()) j["output_dir"] = o.out;
  return j;
}

void print_result(const RunResult& r) {
  std::cout << "scheme " << to_string(r.config.scheme) << "  seed " << r.config.seed << "  trace " << r.trace_checksum;
  if (r.network) std::cout << "  updates " << r.updates;
  std::cout << '\n';
  for (const auto& [name, value] : r.metrics()) std::cout << "  " << name << " = " << fmt_double(value) << '\n';
}

std::vector<ExperimentConfig> scheme_configs(const json& j) {
  if (!j.contains("schemes")) throw ConfigError("compare/sweep configurations need a \"schemes\" list");
  std::vector<ExperimentConfig> out;
  for (const auto& s : j.at("schemes")) {
    json one = j;
    one["scheme"] = s;
    out.push_back(config_from_json(one));
  }
  if (out.empty()) throw ConfigError("\"schemes\" is empty");
  return out;
}

std::vector<std::uint64_t> seed_list(const json& j, const CommonOptions& o) {
  if (o.seed) return {*o.seed};
  if (!j.contains("seeds")) return {j.value("seed", std::uint64_t{1})};
  return j.at("seeds").get<std::vector<std::uint64_t>>();
}

void print_report(const ComparisonReport& report) { write_report_csv(std::cout, report); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network slicing simulator with a deep Q-learning resource manager"};
  app.require_subcommand(1);

  CommonOptions train_opts, eval_opts, compare_opts, sweep_opts;
  std::string checkpoint;
  auto* train = app.add_subcommand("train", "Train a DQL agent, evaluate it and save a checkpoint");
  add_common(train, train_opts);
  auto* eval = app.add_subcommand("eval", "Evaluate one scheme (DQL from a checkpoint if given)");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", checkpoint, "Trained network to evaluate")->check(CLI::ExistingFile);
  auto* cmp = app.add_subcommand("compare", "Paired comparison of the listed schemes over the listed seeds");
  add_common(cmp, compare_opts);
  auto* swp = app.add_subcommand("sweep", "Comparison repeated over qoe_weight or antenna_count values");
  add_common(swp, sweep_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      json j = load_json(train_opts);
      j["scheme"] = "dql";
      const auto cfg = config_from_json(j);
      print_result(run_experiment(cfg));
    } else if (*eval) {
      const auto cfg = config_from_json(load_json(eval_opts));
      if (!checkpoint.empty()) {
        if (cfg.scheme != Scheme::kDql) throw ConfigError("--checkpoint requires scheme dql");
        const auto cp = load_checkpoint(checkpoint);
        print_result(run_experiment(cfg, &cp.network));
      } else {
        print_result(run_experiment(cfg));
      }
    } else if (*cmp) {
      const json j = load_json(compare_opts);
      const auto configs = scheme_configs(j);
      const auto seeds = seed_list(j, compare_opts);
      print_report(compare(configs, seeds, j.value("output_dir", std::string())));
    } else if (*swp) {
      const json j = load_json(sweep_opts);
      if (!j.contains("sweep")) throw ConfigError("sweep configurations need a \"sweep\" object");
      const auto& s = j.at("sweep");
      const auto axis = parse_sweep_axis(s.at("axis").get<std::string>());
      const auto values = s.at("values").get<std::vector<double>>();
      const auto configs = scheme_configs(j);
      const auto seeds = seed_list(j, sweep_opts);
      for (const auto& point : sweep(configs, axis, values, seeds, j.value("output_dir", std::string()))) {
        std::cout << "# " << to_string(axis) << " = " << fmt_double(point.value) << '\n';
        print_report(point.report);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingDivergence& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
