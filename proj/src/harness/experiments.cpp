#include "metashape/harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "metashape/agents/ddpg.hpp"
#include "metashape/agents/dqn.hpp"
#include "metashape/agents/exploration.hpp"
#include "metashape/envs/grid_io.hpp"
#include "metashape/harness/heatmap.hpp"
#include "metashape/harness/verify.hpp"
#include "metashape/meta/meta_test.hpp"
#include "metashape/nn/optim.hpp"
#include "metashape/shaping/shaping.hpp"

namespace metashape::harness {

namespace fs = std::filesystem;

namespace {

// Per-job stream tags.
constexpr std::uint64_t kLearnerStream = 10'000;
constexpr std::uint64_t kTrainEnvStream = 7;
constexpr std::uint64_t kEvalEnvStream = 8;

bool uses_prior(ExperimentKind kind) {
  return kind == ExperimentKind::MetaTestAdapt || kind == ExperimentKind::MetaTestShapingOnly ||
         kind == ExperimentKind::BaselineMaml;
}

bool continuous_run(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::BaselineUnshapedDdpg) return true;
  return config.env == EnvFamily::CartPole && config.cartpole.continuous &&
         (config.kind == ExperimentKind::MetaTestShapingOnly || config.kind == ExperimentKind::BaselineUnshapedDqn);
}

nn::MlpSpec filled_trunk(const ExperimentConfig& config, std::size_t input) {
  nn::MlpSpec trunk = config.trunk;
  trunk.input = input;
  return trunk;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const std::string& l : lines) out << l << '\n';
}

std::vector<double> read_lengths(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read held-out file " + path.string());
  std::vector<double> lengths;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    try {
      std::size_t used = 0;
      lengths.push_back(std::stod(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": expected a pole length");
    }
  }
  return lengths;
}

void write_heldout(const fs::path& path, const std::vector<HeldoutTask>& tasks) {
  if (!tasks.empty() && std::holds_alternative<envs::GridTask>(tasks.front())) {
    std::vector<envs::GridTask> grids;
    for (const HeldoutTask& t : tasks) grids.push_back(std::get<envs::GridTask>(t));
    envs::write_task_set(path, grids);
    return;
  }
  std::vector<std::string> lines;
  for (const HeldoutTask& t : tasks) lines.push_back(format_double(std::get<envs::CartPoleTask>(t).pole_length));
  write_lines(path, lines);
}

void write_meta_log(const fs::path& path, const std::vector<meta::MetaIterationLog>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,meta_loss,task_loss,epsilon,mean_return\n";
  for (const meta::MetaIterationLog& e : log) {
    out << e.iteration << ',' << format_double(e.meta_loss) << ',' << format_double(e.task_loss) << ','
        << format_double(e.epsilon) << ',' << format_double(e.mean_return) << '\n';
  }
}

void write_echo(const ExperimentConfig& config, const std::string& name) {
  std::ofstream out(output_dir(config) / ("config_" + name + ".txt"));
  out << format_config(config);
}

agents::LoopResult run_job(const ExperimentConfig& config, const HeldoutTask& task,
                           const meta::PriorCheckpoint* prior, std::uint64_t seed) {
  auto train = make_env(task, derive_seed(seed, kTrainEnvStream));
  auto eval = make_env(task, derive_seed(seed, kEvalEnvStream));
  const double gamma = config.gamma;
  switch (config.kind) {
    case ExperimentKind::MetaTestAdapt:
    case ExperimentKind::BaselineMaml: {
      meta::AdaptConfig adapt{config.loop, config.adapt_lr, gamma};
      return config.kind == ExperimentKind::MetaTestAdapt ? meta::meta_test_adapt(*train, *eval, *prior, adapt, seed).loop
                                                          : meta::maml_baseline_adapt(*train, *eval, *prior, adapt, seed).loop;
    }
    case ExperimentKind::MetaTestShapingOnly: {
      shaping::ShapedEnv shaped(std::move(train), prior->potential(), gamma);
      return continuous_run(config) ? run_ddpg(shaped, *eval, config, seed) : run_dqn(shaped, *eval, config, seed);
    }
    case ExperimentKind::BaselineUnshapedDqn:
      return continuous_run(config) ? run_ddpg(*train, *eval, config, seed) : run_dqn(*train, *eval, config, seed);
    case ExperimentKind::BaselineUnshapedDdpg:
      return run_ddpg(*train, *eval, config, seed);
    default:
      throw std::logic_error("run_job: not an evaluation kind");
  }
}

}  // namespace

std::string task_id(const HeldoutTask& task) {
  if (const auto* g = std::get_if<envs::GridTask>(&task)) return "grid:" + envs::task_hash_hex(*g);
  return std::get<envs::CartPoleTask>(task).id();
}

std::string disjoint_key(const std::string& id) {
  for (const char* mode : {"cartpole:discrete:", "cartpole:continuous:"}) {
    if (id.rfind(mode, 0) == 0) return "cartpole:" + id.substr(std::char_traits<char>::length(mode));
  }
  return id;
}

fs::path prior_path(const ExperimentConfig& config, std::uint64_t seed) {
  fs::path p = expand_seed(config.prior, seed);
  return p.is_absolute() ? p : output_dir(config) / p;
}

fs::path training_tasks_path(const fs::path& prior) {
  fs::path p = prior;
  p += ".tasks";
  return p;
}

std::vector<std::string> read_task_ids(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read task list " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

std::set<std::string> training_task_ids(const ExperimentConfig& config) {
  std::set<std::string> ids;
  for (std::uint64_t seed : config.seeds) {
    const fs::path list = training_tasks_path(prior_path(config, seed));
    if (!fs::exists(list)) continue;
    for (const std::string& id : read_task_ids(list)) ids.insert(disjoint_key(id));
  }
  return ids;
}

std::vector<HeldoutTask> resolve_heldout(const ExperimentConfig& config, const std::set<std::string>& training) {
  const envs::ActionMode mode = continuous_run(config) ? envs::ActionMode::Continuous : envs::ActionMode::Discrete;
  std::vector<HeldoutTask> tasks;
  if (!config.heldout_file.empty()) {
    if (config.env == EnvFamily::Grid) {
      for (envs::GridTask& g : envs::read_task_set(config.heldout_file)) tasks.emplace_back(std::move(g));
    } else {
      for (double length : read_lengths(config.heldout_file)) tasks.emplace_back(envs::CartPoleTask{length, mode});
    }
    std::vector<std::string> seen;
    for (const HeldoutTask& t : tasks) {
      if (training.contains(disjoint_key(task_id(t)))) seen.push_back(task_id(t));
    }
    if (!seen.empty()) {
      std::string msg = "held-out tasks overlap meta-training tasks:";
      for (const std::string& s : seen) msg += " " + s;
      throw std::invalid_argument(msg);
    }
    return tasks;
  }

  Rng rng(config.heldout_seed);
  std::set<std::string> taken;
  const long max_draws = 1000L * config.heldout_count;
  for (long draw = 0; static_cast<int>(tasks.size()) < config.heldout_count; ++draw) {
    if (draw >= max_draws) throw std::runtime_error("resolve_heldout: could not find enough unseen tasks");
    HeldoutTask t;
    if (config.env == EnvFamily::Grid) {
      t = envs::sample_grid_task(rng, config.grid.width, config.grid.height, config.grid.obstacle_probability);
    } else {
      t = envs::sample_cartpole_task(rng, config.cartpole.min_length, config.cartpole.max_length, mode);
    }
    const std::string key = disjoint_key(task_id(t));
    if (training.contains(key) || !taken.insert(key).second) continue;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::unique_ptr<envs::Env> make_env(const HeldoutTask& task, std::uint64_t seed) {
  if (const auto* g = std::get_if<envs::GridTask>(&task)) return std::make_unique<envs::GridEnv>(*g);
  return std::make_unique<envs::CartPoleEnv>(std::get<envs::CartPoleTask>(task), seed);
}

std::unique_ptr<envs::TaskDistribution> meta_distribution(const ExperimentConfig& config) {
  if (config.env == EnvFamily::Grid) {
    return std::make_unique<envs::GridDistribution>(config.grid.width, config.grid.height,
                                                    config.grid.obstacle_probability);
  }
  return std::make_unique<envs::CartPoleDistribution>(config.cartpole.min_length, config.cartpole.max_length,
                                                      envs::ActionMode::Discrete);
}

std::string experiment_name(const ExperimentConfig& config) {
  std::string name = to_string(config.kind);
  if (continuous_run(config) && config.kind != ExperimentKind::BaselineUnshapedDdpg) name += "-ddpg";
  return name;
}

agents::LoopResult run_dqn(envs::Env& train_env, envs::Env& eval_env, const ExperimentConfig& config,
                           std::uint64_t seed) {
  const envs::ActionSpace space = train_env.action_space();
  if (space.continuous()) throw std::invalid_argument("run_dqn: needs discrete actions");
  const nn::QNet net(nn::MlpSpec{train_env.observation_size(), config.dqn_hidden, config.dqn_activation},
                     space.discrete);
  Rng init(derive_seed(seed, 0));
  Rng act(derive_seed(seed, 1));
  nn::ParamVector params = net.init_params(init);
  nn::OptimizerState adam = nn::OptimizerState::adam(config.dqn_lr);

  agents::LearnerHooks hooks;
  hooks.act = [&](const envs::Observation& obs, double eps) -> envs::Action {
    return agents::epsilon_greedy(agents::q_row(net, params, obs), eps, act);
  };
  hooks.update = [&](const agents::Batch& batch) {
    params = agents::dqn_update(net, params, batch, config.gamma, adam).params;
  };
  hooks.greedy = agents::greedy_policy(net, params);
  return agents::run_training_loop(train_env, eval_env, config.loop, hooks, derive_seed(seed, 2));
}

agents::LoopResult run_ddpg(envs::Env& train_env, envs::Env& eval_env, const ExperimentConfig& config,
                            std::uint64_t seed) {
  if (!train_env.action_space().continuous()) throw std::invalid_argument("run_ddpg: needs continuous actions");
  Rng init(derive_seed(seed, 0));
  Rng act(derive_seed(seed, 1));
  agents::DdpgAgent agent = agents::DdpgAgent::create(train_env.observation_size(), config.ddpg, init);

  agents::LearnerHooks hooks;
  hooks.act = [&](const envs::Observation& obs, double) -> envs::Action {
    return agent.explore(obs, config.ddpg.noise_sigma, act);
  };
  hooks.update = [&](const agents::Batch& batch) { agents::ddpg_update(agent, batch, config.gamma); };
  hooks.greedy = agents::actor_policy(agent);
  return agents::run_training_loop(train_env, eval_env, config.loop, hooks, derive_seed(seed, 2));
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<meta::MetaTrainResult> run_meta_train(const ExperimentConfig& config, std::ostream& log) {
  const auto dist = meta_distribution(config);
  const nn::MlpSpec trunk = filled_trunk(config, dist->observation_size());
  meta::MetaConfig meta_config = config.meta;
  meta_config.gamma = config.gamma;
  const std::map<std::string, std::string> echo = config.echo();

  std::vector<meta::MetaTrainResult> results(config.seeds.size());
  std::mutex log_mutex;
  parallel_for(config.seeds.size(), config.threads, [&](std::size_t i) {
    const std::uint64_t seed = config.seeds[i];
    const long every = std::max(1L, meta_config.iterations / 10);
    results[i] = meta::meta_train(*dist, trunk, meta_config, seed, [&](const meta::MetaIterationLog& e) {
      if ((e.iteration + 1) % every != 0) return;
      std::lock_guard lock(log_mutex);
      log << "seed " << seed << " iteration " << e.iteration + 1 << ": meta loss " << e.meta_loss << ", return "
          << e.mean_return << '\n';
    });
    meta::PriorCheckpoint& prior = results[i].prior;
    for (const auto& [k, v] : echo) {
      // Run location and worker count do not change the result.
      if (k != "out" && k != "threads") prior.extra["config." + k] = v;
    }
    const fs::path path = prior_path(config, seed);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    meta::save_prior(path.string(), prior);
    write_lines(training_tasks_path(path), results[i].task_ids);
    write_meta_log(output_dir(config) / ("meta_log_seed" + std::to_string(seed) + ".csv"), results[i].log);
  });
  return results;
}

std::vector<CurveRecord> run_evaluation(const ExperimentConfig& config, std::ostream& log) {
  const std::string name = experiment_name(config);
  const std::vector<HeldoutTask> tasks = resolve_heldout(config, training_task_ids(config));
  write_heldout(output_dir(config) / ("heldout_" + name + ".txt"), tasks);

  std::vector<std::optional<meta::PriorCheckpoint>> priors(config.seeds.size());
  if (uses_prior(config.kind)) {
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
      priors[s] = meta::load_prior(prior_path(config, config.seeds[s]).string());
    }
  }

  const std::size_t jobs = tasks.size() * config.seeds.size();
  std::vector<agents::LoopResult> results(jobs);
  std::mutex log_mutex;
  parallel_for(jobs, config.threads, [&](std::size_t j) {
    const std::size_t t = j / config.seeds.size();
    const std::size_t s = j % config.seeds.size();
    const std::uint64_t seed = derive_seed(config.seeds[s], kLearnerStream + t);
    results[j] = run_job(config, tasks[t], priors[s] ? &*priors[s] : nullptr, seed);
    std::lock_guard lock(log_mutex);
    log << name << " task " << t << " seed " << config.seeds[s] << ": final return "
        << results[j].curve.back().ret << '\n';
  });

  std::vector<CurveRecord> records;
  for (std::size_t j = 0; j < jobs; ++j) {
    const std::string id = task_id(tasks[j / config.seeds.size()]);
    const std::uint64_t seed = config.seeds[j % config.seeds.size()];
    for (const agents::CurvePoint& p : results[j].curve) records.push_back({name, id, seed, p.step, p.ret, p.env_steps});
  }
  write_curves(output_dir(config) / ("curves_" + name + ".csv"), records);
  write_budget(output_dir(config) / ("budget_" + name + ".csv"), records);
  return records;
}

std::vector<HeatmapScore> run_heatmaps(const ExperimentConfig& config, std::ostream& log) {
  if (config.env != EnvFamily::Grid) throw std::invalid_argument("heatmaps need the grid environment");
  const std::vector<HeldoutTask> tasks = resolve_heldout(config, training_task_ids(config));
  std::vector<HeatmapScore> scores;
  std::ofstream table(output_dir(config) / "heatmap_scores.csv");
  table << "seed,task,spearman\n";
  for (std::uint64_t seed : config.seeds) {
    const meta::PriorCheckpoint prior = meta::load_prior(prior_path(config, seed).string());
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const auto& grid = std::get<envs::GridTask>(tasks[t]);
      const Heatmap map = export_heatmap(prior, grid);
      write_heatmap(output_dir(config) / ("heatmap_seed" + std::to_string(seed) + "_task" + std::to_string(t) + ".csv"),
                    map, grid.width);
      HeatmapScore score{seed, task_id(tasks[t]), distance_correlation(map, grid)};
      table << seed << ',' << score.task << ',' << format_double(score.spearman) << '\n';
      scores.push_back(score);
    }
    const auto good = std::count_if(scores.end() - static_cast<long>(tasks.size()), scores.end(),
                                    [](const HeatmapScore& s) { return s.spearman >= 0.8; });
    log << "seed " << seed << ": " << good << " of " << tasks.size() << " maps with spearman >= 0.8\n";
  }
  return scores;
}

int run(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  std::vector<std::string> problems;
  if (uses_prior(config.kind)) {
    for (std::uint64_t seed : config.seeds) {
      const fs::path p = prior_path(config, seed);
      if (!fs::exists(p)) problems.push_back("missing prior " + p.string());
      if (!fs::exists(training_tasks_path(p))) problems.push_back("missing task list " + training_tasks_path(p).string());
    }
  }
  if (!config.heldout_file.empty() && !fs::exists(config.heldout_file)) {
    problems.push_back("missing held-out file " + config.heldout_file);
  }
  if ((config.kind == ExperimentKind::MetaTestAdapt || config.kind == ExperimentKind::BaselineMaml) &&
      config.env == EnvFamily::CartPole && config.cartpole.continuous) {
    problems.push_back(to_string(config.kind) + " needs discrete actions");
  }
  if (config.kind == ExperimentKind::BaselineUnshapedDdpg && config.env != EnvFamily::CartPole) {
    problems.push_back("baseline-unshaped-ddpg needs the cartpole environment");
  }
  if (!problems.empty()) {
    std::string msg = "cannot start:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }

  fs::create_directories(output_dir(config));
  switch (config.kind) {
    case ExperimentKind::Verify: {
      const VerifyReport report = run_verify(config.verify);
      const std::string text = format_report(report);
      log << text;
      std::ofstream(output_dir(config) / "verify_report.txt") << text;
      write_echo(config, "verify");
      return report.passed() ? 0 : 1;
    }
    case ExperimentKind::MetaTrain:
      run_meta_train(config, log);
      write_echo(config, "meta-train");
      return 0;
    default:
      run_evaluation(config, log);
      write_echo(config, experiment_name(config));
      return 0;
  }
}

}  // namespace metashape::harness
