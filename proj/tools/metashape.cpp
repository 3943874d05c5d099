// Command-line front end: meta-train, meta-test, baseline, verify,
// aggregate, heatmap.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metashape/harness/aggregate.hpp"
#include "metashape/harness/config.hpp"
#include "metashape/harness/csv.hpp"
#include "metashape/harness/experiments.hpp"

namespace fs = std::filesystem;
using namespace metashape;

namespace {

struct CommonFlags {
  std::string config;
  std::string seeds;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seeds, "seed list, e.g. 0-4 or 0,2,7");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--set", flags.sets, "override one key, key=value (repeatable)");
}

harness::ExperimentConfig build_config(const CommonFlags& flags, harness::ExperimentKind kind) {
  harness::ExperimentConfig config = flags.config.empty() ? harness::ExperimentConfig{}
                                                          : harness::load_config(flags.config);
  for (const std::string& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    harness::set_option(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!flags.seeds.empty()) config.seeds = harness::parse_seed_list(flags.seeds);
  if (!flags.out.empty()) config.out = flags.out;
  config.kind = kind;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learned potential-based reward shaping"};
  app.require_subcommand(1);

  CommonFlags train_flags, test_flags, base_flags, verify_flags, heat_flags;
  auto* train = app.add_subcommand("meta-train", "meta-learn one prior per seed");
  add_common(train, train_flags);

  std::string mode = "adapt";
  auto* test = app.add_subcommand("meta-test", "evaluate priors on held-out tasks");
  add_common(test, test_flags);
  test->add_option("--mode", mode, "adapt | shaping")->check(CLI::IsMember({"adapt", "shaping"}));

  std::string method = "dqn";
  auto* base = app.add_subcommand("baseline", "run a baseline on held-out tasks");
  add_common(base, base_flags);
  base->add_option("--method", method, "maml | dqn | ddpg")->check(CLI::IsMember({"maml", "dqn", "ddpg"}));

  auto* verify = app.add_subcommand("verify", "run the tabular oracle battery");
  add_common(verify, verify_flags);

  std::vector<std::string> curves;
  std::string aggregate_out;
  auto* agg = app.add_subcommand("aggregate", "median and quartile curves");
  agg->add_option("curves", curves, "curve CSV files")->required()->check(CLI::ExistingFile);
  agg->add_option("--out", aggregate_out, "write the table here instead of stdout");

  auto* heat = app.add_subcommand("heatmap", "export prior value heatmaps on held-out grids");
  add_common(heat, heat_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    using harness::ExperimentKind;
    if (*train) return harness::run(build_config(train_flags, ExperimentKind::MetaTrain), std::cout);
    if (*test) {
      const auto kind = mode == "adapt" ? ExperimentKind::MetaTestAdapt : ExperimentKind::MetaTestShapingOnly;
      return harness::run(build_config(test_flags, kind), std::cout);
    }
    if (*base) {
      const auto kind = method == "maml"  ? ExperimentKind::BaselineMaml
                        : method == "dqn" ? ExperimentKind::BaselineUnshapedDqn
                                          : ExperimentKind::BaselineUnshapedDdpg;
      return harness::run(build_config(base_flags, kind), std::cout);
    }
    if (*verify) return harness::run(build_config(verify_flags, ExperimentKind::Verify), std::cout);
    if (*agg) {
      std::vector<harness::CurveRecord> records;
      for (const std::string& f : curves) {
        auto part = harness::read_curves(f);
        records.insert(records.end(), part.begin(), part.end());
      }
      const auto rows = harness::aggregate(records);
      if (!aggregate_out.empty()) {
        harness::write_aggregate(aggregate_out, rows);
      } else {
        std::cout << "experiment,step,median,q25,q75,count\n";
        for (const auto& r : rows) {
          std::cout << r.experiment << ',' << r.step << ',' << harness::format_double(r.median) << ','
                    << harness::format_double(r.q25) << ',' << harness::format_double(r.q75) << ',' << r.count
                    << '\n';
        }
      }
      return EXIT_SUCCESS;
    }
    if (*heat) {
      auto config = build_config(heat_flags, ExperimentKind::MetaTestShapingOnly);
      config.validate();
      fs::create_directories(harness::output_dir(config));
      harness::run_heatmaps(config, std::cout);
      return EXIT_SUCCESS;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return EXIT_SUCCESS;
}
