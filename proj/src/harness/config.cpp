#include "metashape/harness/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace metashape::harness {

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::MetaTrain, "meta-train"},
    {ExperimentKind::MetaTestAdapt, "meta-test-adapt"},
    {ExperimentKind::MetaTestShapingOnly, "meta-test-shaping-only"},
    {ExperimentKind::BaselineMaml, "baseline-maml"},
    {ExperimentKind::BaselineUnshapedDqn, "baseline-unshaped-dqn"},
    {ExperimentKind::BaselineUnshapedDdpg, "baseline-unshaped-ddpg"},
    {ExperimentKind::Verify, "verify"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string& s) {
  Int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

std::vector<std::size_t> to_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_int<std::size_t>(trim(item)));
  if (out.empty()) throw std::invalid_argument("empty size list");
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
  const char* name;
  Setter set;
  Getter get;
};

#define DOUBLE_KEY(name, field) \
  Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = to_double(v); }, \
      [](const ExperimentConfig& c) { return fmt(c.field); }}
#define INT_KEY(name, field, type) \
  Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = to_int<type>(v); }, \
      [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define BOOL_KEY(name, field) \
  Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = to_bool(v); }, \
      [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); }}
#define STRING_KEY(name, field) \
  Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = v; }, \
      [](const ExperimentConfig& c) { return c.field; }}
#define SIZES_KEY(name, field) \
  Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = to_sizes(v); }, \
      [](const ExperimentConfig& c) { return join(c.field); }}
#define ACTIVATION_KEY(name, field) \
  Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = nn::parse_activation(v); }, \
      [](const ExperimentConfig& c) { return nn::to_string(c.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"kind", [](ExperimentConfig& c, const std::string& v) { c.kind = parse_kind(v); },
          [](const ExperimentConfig& c) { return to_string(c.kind); }},
      Key{"env",
          [](ExperimentConfig& c, const std::string& v) {
            if (v == "grid") {
              c.env = EnvFamily::Grid;
            } else if (v == "cartpole") {
              c.env = EnvFamily::CartPole;
            } else {
              throw std::invalid_argument("env must be grid or cartpole, got '" + v + "'");
            }
          },
          [](const ExperimentConfig& c) { return std::string(c.env == EnvFamily::Grid ? "grid" : "cartpole"); }},
      INT_KEY("grid.width", grid.width, int),
      INT_KEY("grid.height", grid.height, int),
      DOUBLE_KEY("grid.obstacle_probability", grid.obstacle_probability),
      DOUBLE_KEY("cartpole.min_length", cartpole.min_length),
      DOUBLE_KEY("cartpole.max_length", cartpole.max_length),
      BOOL_KEY("cartpole.continuous", cartpole.continuous),
      SIZES_KEY("net.hidden", trunk.hidden),
      ACTIVATION_KEY("net.activation", trunk.activation),
      DOUBLE_KEY("gamma", gamma),
      DOUBLE_KEY("meta.alpha", meta.alpha),
      DOUBLE_KEY("meta.beta", meta.beta),
      INT_KEY("meta.inner_steps", meta.inner_steps, int),
      INT_KEY("meta.tasks", meta.tasks_per_iteration, int),
      INT_KEY("meta.iterations", meta.iterations, long),
      INT_KEY("meta.frames", meta.frames_per_task, int),
      INT_KEY("meta.inner_batch", meta.inner_batch, std::size_t),
      INT_KEY("meta.outer_batch", meta.outer_batch, std::size_t),
      BOOL_KEY("meta.second_order", meta.second_order),
      BOOL_KEY("meta.stop_target", meta.stop_target_gradient),
      DOUBLE_KEY("meta.epsilon_start", meta.epsilon_start),
      DOUBLE_KEY("meta.epsilon_end", meta.epsilon_end),
      DOUBLE_KEY("meta.epsilon_fraction", meta.epsilon_fraction),
      INT_KEY("loop.updates", loop.updates, long),
      INT_KEY("loop.warmup", loop.warmup, long),
      INT_KEY("loop.frames_per_update", loop.frames_per_update, int),
      INT_KEY("loop.batch", loop.batch, std::size_t),
      INT_KEY("loop.capacity", loop.capacity, std::size_t),
      DOUBLE_KEY("loop.epsilon_start", loop.epsilon_start),
      DOUBLE_KEY("loop.epsilon_end", loop.epsilon_end),
      DOUBLE_KEY("loop.epsilon_fraction", loop.epsilon_fraction),
      INT_KEY("loop.eval_every", loop.eval_every, long),
      INT_KEY("loop.eval_episodes", loop.eval_episodes, int),
      DOUBLE_KEY("dqn.lr", dqn_lr),
      SIZES_KEY("dqn.hidden", dqn_hidden),
      ACTIVATION_KEY("dqn.activation", dqn_activation),
      DOUBLE_KEY("adapt.lr", adapt_lr),
      SIZES_KEY("ddpg.actor_hidden", ddpg.actor_hidden),
      SIZES_KEY("ddpg.critic_hidden", ddpg.critic_hidden),
      ACTIVATION_KEY("ddpg.activation", ddpg.activation),
      DOUBLE_KEY("ddpg.actor_lr", ddpg.actor_lr),
      DOUBLE_KEY("ddpg.critic_lr", ddpg.critic_lr),
      DOUBLE_KEY("ddpg.tau", ddpg.tau),
      DOUBLE_KEY("ddpg.noise_sigma", ddpg.noise_sigma),
      Key{"seeds", [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); },
          [](const ExperimentConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < c.seeds.size(); ++i) s += (i ? "," : "") + std::to_string(c.seeds[i]);
            return s;
          }},
      STRING_KEY("heldout.file", heldout_file),
      INT_KEY("heldout.count", heldout_count, int),
      INT_KEY("heldout.seed", heldout_seed, std::uint64_t),
      STRING_KEY("prior", prior),
      STRING_KEY("out", out),
      INT_KEY("threads", threads, int),
      INT_KEY("verify.invariance_maps", verify.invariance_maps, int),
      INT_KEY("verify.invariance_size", verify.invariance_size, int),
      INT_KEY("verify.alternating_maps", verify.alternating_maps, int),
      INT_KEY("verify.alternating_size", verify.alternating_size, int),
      INT_KEY("verify.alternating_sweeps", verify.alternating_sweeps, int),
      DOUBLE_KEY("verify.obstacle_probability", verify.obstacle_probability),
      INT_KEY("verify.seed", verify.seed, std::uint64_t),
  };
  return table;
}

#undef DOUBLE_KEY
#undef INT_KEY
#undef BOOL_KEY
#undef STRING_KEY
#undef SIZES_KEY
#undef ACTIVATION_KEY

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const KindName& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const KindName& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

void set_option(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const Key& k : keys()) {
    if (key == k.name) {
      k.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::map<std::string, std::string> out;
  for (const Key& k : keys()) out[k.name] = k.get(*this);
  return out;
}

std::string format_config(const ExperimentConfig& config) {
  std::string s;
  for (const Key& k : keys()) s += std::string(k.name) + " = " + k.get(config) + "\n";
  return s;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> errors;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    try {
      set_option(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
  };
  check(!seeds.empty(), "seeds: list must be non-empty");
  check(grid.width >= 1 && grid.height >= 1 && grid.width * grid.height >= 2, "grid: need at least two cells");
  check(grid.obstacle_probability >= 0.0 && grid.obstacle_probability < 1.0, "grid.obstacle_probability: in [0, 1)");
  check(cartpole.min_length > 0.0 && cartpole.min_length <= cartpole.max_length, "cartpole: need 0 < min <= max");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma: must be in [0, 1]");
  check(dqn_lr > 0.0 && adapt_lr > 0.0, "dqn.lr / adapt.lr: must be positive");
  check(heldout_count >= 1 || !heldout_file.empty(), "heldout.count: must be positive");
  check(threads >= 0, "threads: must be >= 0");
  check(!out.empty(), "out: must be non-empty");
  try {
    meta.validate();
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  try {
    loop.validate();
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = to_int<std::uint64_t>(item.substr(0, dash));
      const auto hi = to_int<std::uint64_t>(item.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("descending seed range '" + item + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(to_int<std::uint64_t>(item));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

std::string expand_seed(const std::string& pattern, std::uint64_t seed) {
  std::string out = pattern;
  const std::string tag = "{seed}";
  for (auto pos = out.find(tag); pos != std::string::npos; pos = out.find(tag)) {
    out.replace(pos, tag.size(), std::to_string(seed));
  }
  return out;
}

std::filesystem::path output_dir(const ExperimentConfig& config) {
  if (const char* env = std::getenv("METASHAPE_OUT"); env != nullptr && *env != '\0') return env;
  return config.out;
}

}  // namespace metashape::harness
