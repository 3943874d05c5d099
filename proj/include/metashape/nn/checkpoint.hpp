#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "metashape/nn/params.hpp"

namespace metashape::nn {

/// Text checkpoint, version 1:
///
///   metashape-params 1
///   meta <key> <value...>        (zero or more, value runs to end of line)
///   tensors <count>
///   <name> <rows> <cols>
///   <rows*cols values, shortest round-trip decimal>
///
/// Values are written with std::to_chars, so save/load is bit-exact.
struct Checkpoint {
  ParamVector params;
  std::map<std::string, std::string> meta;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace metashape::nn
