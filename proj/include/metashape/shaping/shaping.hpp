#pragma once

#include <memory>
#include <string>
#include <vector>

#include "metashape/envs/env.hpp"
#include "metashape/envs/grid.hpp"
#include "metashape/nn/networks.hpp"

namespace metashape::shaping {

using envs::Observation;
using nn::Tensor;

/// State potential Phi(s). Implementations must be finite on every state
/// they are asked about and safe to call concurrently.
class PotentialFn {
 public:
  virtual ~PotentialFn() = default;
  virtual double operator()(const Observation& state) const = 0;
  /// One value per row of `states`.
  virtual std::vector<double> batch(const Tensor& states) const;
  virtual std::string describe() const = 0;
};

class ZeroPotential final : public PotentialFn {
 public:
  double operator()(const Observation&) const override { return 0.0; }
  std::string describe() const override { return "zero"; }
};

class ConstantPotential final : public PotentialFn {
 public:
  explicit ConstantPotential(double c) : c_(c) {}
  double operator()(const Observation&) const override { return c_; }
  std::string describe() const override { return "constant"; }

 private:
  double c_;
};

/// One value per grid cell, looked up from the current-position channel.
class TabularGridPotential final : public PotentialFn {
 public:
  /// `values` is indexed by GridTask::index; obstacle entries are ignored.
  TabularGridPotential(envs::GridTask task, std::vector<double> values);
  double operator()(const Observation& state) const override;
  double at(envs::Cell c) const { return values_.at(static_cast<std::size_t>(task_.index(c))); }
  std::string describe() const override { return "tabular-grid"; }

 private:
  envs::GridTask task_;
  std::vector<double> values_;
};

/// Value head V_theta of a dueling network.
class NetworkPotential final : public PotentialFn {
 public:
  NetworkPotential(std::shared_ptr<const nn::DuelingNet> net, nn::ParamVector params);
  double operator()(const Observation& state) const override;
  std::vector<double> batch(const Tensor& states) const override;
  std::string describe() const override { return "network " + net_->describe(); }

  const nn::DuelingNet& net() const { return *net_; }
  const nn::ParamVector& params() const { return params_; }

 private:
  std::shared_ptr<const nn::DuelingNet> net_;
  nn::ParamVector params_;
};

/// r + gamma * phi_next - phi, with phi_next replaced by 0 when `done`.
/// Throws std::domain_error on non-finite potentials.
double shape_reward(double phi, double phi_next, double gamma, double reward, bool done);
double shape_reward(const PotentialFn& potential, double gamma, const Observation& state,
                    const Observation& next_state, double reward, bool done);

/// Same dynamics as the wrapped env; only the learner-facing reward changes.
/// StepResult::base_reward still carries the task reward.
class ShapedEnv final : public envs::Env {
 public:
  ShapedEnv(std::unique_ptr<envs::Env> base, std::shared_ptr<const PotentialFn> potential, double gamma);

  std::size_t observation_size() const override { return base_->observation_size(); }
  envs::ActionSpace action_space() const override { return base_->action_space(); }
  Observation reset() override;
  envs::StepResult step(const envs::Action& action) override;
  std::string task_id() const override { return base_->task_id(); }

  envs::Env& base() { return *base_; }
  const PotentialFn& potential() const { return *potential_; }
  double gamma() const { return gamma_; }

 private:
  std::unique_ptr<envs::Env> base_;
  std::shared_ptr<const PotentialFn> potential_;
  double gamma_;
  Observation current_;
};

std::unique_ptr<ShapedEnv> wrap(std::unique_ptr<envs::Env> base, std::shared_ptr<const PotentialFn> potential,
                                double gamma);

}  // namespace metashape::shaping
