#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "metashape/nn/networks.hpp"
#include "metashape/shaping/shaping.hpp"

namespace metashape::meta {

/// Meta-learned dueling prior theta with its architecture and provenance.
struct PriorCheckpoint {
  nn::MlpSpec trunk;
  std::size_t actions = 0;
  nn::ParamVector theta;
  std::string distribution;
  std::uint64_t seed = 0;
  long iteration = 0;
  std::map<std::string, std::string> extra;  ///< config echo, hashes

  std::shared_ptr<const nn::DuelingNet> net() const;
  /// The value head as a standalone potential.
  std::shared_ptr<const shaping::NetworkPotential> potential() const;
  /// Throws std::invalid_argument if theta does not fit the architecture.
  void validate() const;
};

void save_prior(const std::string& path, const PriorCheckpoint& prior);
PriorCheckpoint load_prior(const std::string& path);

}  // namespace metashape::meta
