#include "metashape/meta/prior.hpp"

#include <sstream>
#include <stdexcept>

#include "metashape/nn/checkpoint.hpp"

namespace metashape::meta {

std::shared_ptr<const nn::DuelingNet> PriorCheckpoint::net() const {
  return std::make_shared<const nn::DuelingNet>(trunk, actions);
}

std::shared_ptr<const shaping::NetworkPotential> PriorCheckpoint::potential() const {
  return std::make_shared<const shaping::NetworkPotential>(net(), theta);
}

void PriorCheckpoint::validate() const {
  Rng rng(0);
  const nn::ParamVector layout = net()->init_params(rng);
  if (!layout.same_layout(theta)) throw std::invalid_argument("prior: parameters do not match the architecture");
  if (!theta.all_finite()) throw std::invalid_argument("prior: non-finite parameters");
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::size_t> split_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoul(item));
  return out;
}

const std::string& require(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw std::invalid_argument("prior checkpoint lacks meta key '" + key + "'");
  return it->second;
}

}  // namespace

void save_prior(const std::string& path, const PriorCheckpoint& prior) {
  prior.validate();
  nn::Checkpoint ckpt{prior.theta, {}};
  ckpt.meta["arch.input"] = std::to_string(prior.trunk.input);
  ckpt.meta["arch.hidden"] = join(prior.trunk.hidden);
  ckpt.meta["arch.activation"] = nn::to_string(prior.trunk.activation);
  ckpt.meta["arch.actions"] = std::to_string(prior.actions);
  ckpt.meta["provenance.distribution"] = prior.distribution;
  ckpt.meta["provenance.seed"] = std::to_string(prior.seed);
  ckpt.meta["provenance.iteration"] = std::to_string(prior.iteration);
  for (const auto& [k, v] : prior.extra) ckpt.meta["extra." + k] = v;
  nn::save_checkpoint(path, ckpt);
}

PriorCheckpoint load_prior(const std::string& path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  PriorCheckpoint prior;
  prior.trunk.input = std::stoul(require(ckpt.meta, "arch.input"));
  prior.trunk.hidden = split_sizes(require(ckpt.meta, "arch.hidden"));
  prior.trunk.activation = nn::parse_activation(require(ckpt.meta, "arch.activation"));
  prior.actions = std::stoul(require(ckpt.meta, "arch.actions"));
  prior.distribution = require(ckpt.meta, "provenance.distribution");
  prior.seed = std::stoull(require(ckpt.meta, "provenance.seed"));
  prior.iteration = std::stol(require(ckpt.meta, "provenance.iteration"));
  for (const auto& [k, v] : ckpt.meta) {
    if (k.rfind("extra.", 0) == 0) prior.extra[k.substr(6)] = v;
  }
  prior.theta = std::move(ckpt.params);
  prior.validate();
  return prior;
}

}  // namespace metashape::meta
