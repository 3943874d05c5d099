#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "metashape/agents/ddpg.hpp"
#include "metashape/agents/trainer.hpp"
#include "metashape/meta/meta_train.hpp"
#include "metashape/nn/networks.hpp"

namespace metashape::harness {

enum class ExperimentKind {
  MetaTrain,
  MetaTestAdapt,
  MetaTestShapingOnly,
  BaselineMaml,
  BaselineUnshapedDqn,
  BaselineUnshapedDdpg,
  Verify,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

enum class EnvFamily { Grid, CartPole };

struct GridParams {
  int width = 10;
  int height = 10;
  double obstacle_probability = 0.0;
};

struct CartPoleParams {
  double min_length = 0.25;
  double max_length = 5.0;
  bool continuous = false;
};

struct VerifyParams {
  int invariance_maps = 100;
  int invariance_size = 8;
  int alternating_maps = 20;
  int alternating_size = 6;
  int alternating_sweeps = 500;
  double obstacle_probability = 0.2;
  std::uint64_t seed = 0;
};

/// Everything one run needs. Parsed from flat `key = value` text; every key
/// has a default and unknown keys are rejected.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Verify;
  EnvFamily env = EnvFamily::Grid;
  GridParams grid;
  CartPoleParams cartpole;
  nn::MlpSpec trunk{0, {128, 128}, nn::Activation::Relu};  ///< input filled from the env
  meta::MetaConfig meta;
  agents::LoopConfig loop;
  double gamma = 0.99;
  double dqn_lr = 1e-3;
  std::vector<std::size_t> dqn_hidden{128, 128};
  nn::Activation dqn_activation = nn::Activation::Relu;
  double adapt_lr = 1e-3;
  agents::DdpgConfig ddpg;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  /// Held-out tasks: read from `heldout_file` when set, otherwise
  /// `heldout_count` tasks are sampled from `heldout_seed`.
  std::string heldout_file;
  int heldout_count = 20;
  std::uint64_t heldout_seed = 1'000'003;
  /// Prior checkpoint path; `{seed}` is replaced per seed.
  std::string prior = "prior_seed{seed}.ckpt";
  std::string out = "out";
  int threads = 0;  ///< 0 = hardware concurrency
  VerifyParams verify;

  /// Canonical `key = value` lines, one per known key, in a fixed order.
  std::map<std::string, std::string> echo() const;
  void validate() const;
};

/// Throws std::invalid_argument listing every offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies one `key=value` setting, as from the command line.
void set_option(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string format_config(const ExperimentConfig& config);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);
/// Replaces `{seed}` in a path template.
std::string expand_seed(const std::string& pattern, std::uint64_t seed);

/// Output directory: METASHAPE_OUT overrides the configured one.
std::filesystem::path output_dir(const ExperimentConfig& config);

}  // namespace metashape::harness
