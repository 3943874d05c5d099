#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metashape/envs/grid_io.hpp"
#include "metashape/harness/aggregate.hpp"
#include "metashape/harness/config.hpp"
#include "metashape/harness/csv.hpp"
#include "metashape/harness/experiments.hpp"
#include "metashape/harness/heatmap.hpp"
#include "metashape/harness/verify.hpp"
#include "metashape/oracle/tabular.hpp"
#include "metashape/shaping/shaping.hpp"
#include "support.hpp"

using namespace metashape;
using namespace metashape::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<CurveRecord> curve(const std::string& experiment, const std::string& task, std::uint64_t seed,
                               std::vector<double> returns) {
  std::vector<CurveRecord> out;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    out.push_back({experiment, task, seed, static_cast<long>(i) * 10, returns[i], 0});
  }
  return out;
}

ExperimentConfig tiny_config(const fs::path& out) {
  ExperimentConfig c = parse_config(R"(
    env = grid
    grid.width = 4
    grid.height = 4
    net.hidden = 8
    dqn.hidden = 8
    meta.iterations = 2
    meta.tasks = 2
    meta.frames = 32
    meta.inner_batch = 8
    meta.outer_batch = 8
    loop.updates = 20
    loop.warmup = 16
    loop.batch = 8
    loop.eval_every = 10
    seeds = 0-1
    heldout.count = 2
    threads = 2
  )");
  c.out = out.string();
  return c;
}

int run_kind(ExperimentConfig c, ExperimentKind kind) {
  c.kind = kind;
  std::ostringstream log;
  return run(c, log);
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config("kind = meta-train  # comment\nmeta.alpha = 0.5\nseeds = 0-2,7\n");
    CHECK(c.kind == ExperimentKind::MetaTrain);
    CHECK(c.meta.alpha == 0.5);
    CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2, 7});
    CHECK(parse_config(format_config(c)).echo() == c.echo());

    CHECK_THROWS_WITH(parse_config("bogus = 1\n"), doctest::Contains("unknown config key 'bogus'"));
    std::string message;
    try {
      parse_config("meta.alpha = 1\nmeta.beta = x\nnoequals\n");
    } catch (const std::invalid_argument& e) {
      message = e.what();
    }
    CHECK(message.find("line 2") != std::string::npos);
    CHECK(message.find("line 3") != std::string::npos);
    CHECK_THROWS(parse_seed_list("3-1"));
    CHECK_THROWS(parse_seed_list(""));
    CHECK(expand_seed("p{seed}/x{seed}", 4) == "p4/x4");

    ExperimentConfig bad;
    bad.seeds.clear();
    CHECK_THROWS_WITH(bad.validate(), doctest::Contains("seeds"));
  }

  TEST_CASE("curve csv round trip") {
    TempDir dir("metashape_csv");
    std::vector<CurveRecord> rs = curve("x", "grid:01", 3, {0.0, 0.1 + 0.2, 1.0});
    for (std::size_t i = 0; i < rs.size(); ++i) rs[i].env_steps = 100 + static_cast<long>(i);
    write_curves(dir.path / "c.csv", rs);
    write_budget(dir.path / "b.csv", rs);
    CHECK(slurp(dir.path / "c.csv").starts_with(std::string(kCurveHeader) + "\n"));
    CHECK(read_curves(dir.path / "c.csv", dir.path / "b.csv") == rs);
    CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
    CHECK(split_csv("a,,b") == std::vector<std::string>{"a", "", "b"});
  }

  TEST_CASE("aggregation") {
    CHECK(lower_percentile({4, 0, 3, 1, 2}, 0.5) == 2.0);
    CHECK(lower_percentile({4, 0, 3, 1, 2}, 0.25) == 1.0);
    CHECK(lower_percentile({4, 0, 3, 1, 2}, 0.75) == 3.0);
    CHECK(lower_percentile({0, 1, 2, 3}, 0.5) == 1.0);

    std::vector<CurveRecord> rs;
    for (int i = 0; i < 5; ++i) {
      const auto c = curve("e", "t" + std::to_string(i), 0, {static_cast<double>(i), 1.0});
      rs.insert(rs.end(), c.begin(), c.end());
    }
    const auto rows = aggregate(rs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].median == 2.0);
    CHECK(rows[0].q25 == 1.0);
    CHECK(rows[0].q75 == 3.0);
    CHECK(rows[0].count == 5);
    CHECK(rows[1].median == 1.0);

    Rng rng(3);
    std::vector<CurveRecord> shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = aggregate(shuffled);
    REQUIRE(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(again[i].median == rows[i].median);
      CHECK(again[i].q25 == rows[i].q25);
      CHECK(again[i].q75 == rows[i].q75);
    }

    std::vector<CurveRecord> misaligned = rs;
    misaligned.back().step = 15;
    CHECK_THROWS_AS(aggregate(misaligned), std::invalid_argument);
  }

  TEST_CASE("spearman") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(spearman(x, std::vector<double>{10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman(x, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman(x, std::vector<double>{1, 1, 1, 1}) == 0.0);
    CHECK(spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 2, 2, 3}) == doctest::Approx(1.0));
  }

  TEST_CASE("heatmap of the tabular optimum ranks by distance") {
    Rng rng(4);
    for (int m = 0; m < 10; ++m) {
      const envs::GridTask task = envs::sample_grid_task(rng, 8, 8, 0.2);
      const oracle::TabularMDP mdp = oracle::build_tabular(task, 0.99);
      const oracle::TabularValues opt = oracle::value_iteration(mdp, 1e-12);
      std::vector<double> cells(static_cast<std::size_t>(task.cells()), 0.0);
      for (int s = 0; s < mdp.states; ++s) cells[static_cast<std::size_t>(task.index(mdp.cells[s]))] = opt.v[s];
      const Heatmap map = export_heatmap(shaping::TabularGridPotential(task, cells), task);
      for (int i = 0; i < task.cells(); ++i) {
        if (task.obstacles[static_cast<std::size_t>(i)]) {
          CHECK_FALSE(map[static_cast<std::size_t>(i)].has_value());
        } else {
          CHECK(map[static_cast<std::size_t>(i)].value() == cells[static_cast<std::size_t>(i)]);
        }
      }
      CHECK(distance_correlation(map, task) == doctest::Approx(1.0));
    }
  }

  TEST_CASE("heatmap csv marks obstacles") {
    TempDir dir("metashape_heatmap");
    const Heatmap map{1.0, std::nullopt, 0.5, 2.0};
    write_heatmap(dir.path / "h.csv", map, 2);
    CHECK(slurp(dir.path / "h.csv") == "1,NA\n0.5,2\n");
  }

  TEST_CASE("verify report") {
    VerifyParams p;
    p.invariance_maps = 5;
    p.alternating_maps = 3;
    const VerifyReport r = run_verify(p);
    CHECK(r.passed());
    CHECK(r.checks.size() == 3);
    CHECK(format_report(r).find("FAIL") == std::string::npos);

    TempDir dir("metashape_verify");
    ExperimentConfig c;
    c.verify = p;
    c.out = dir.path.string();
    CHECK(run_kind(c, ExperimentKind::Verify) == 0);
    CHECK(fs::exists(dir.path / "verify_report.txt"));
  }

  TEST_CASE("held-out tasks avoid training tasks") {
    ExperimentConfig c;
    c.grid = {3, 3, 0.0};
    c.heldout_count = 5;
    const auto first = resolve_heldout(c, {});
    REQUIRE(first.size() == 5);
    std::set<std::string> training{task_id(first[0]), task_id(first[2])};
    const auto second = resolve_heldout(c, training);
    REQUIRE(second.size() == 5);
    std::set<std::string> ids;
    for (const auto& t : second) {
      CHECK(training.count(task_id(t)) == 0);
      ids.insert(task_id(t));
    }
    CHECK(ids.size() == 5);

    TempDir dir("metashape_heldout");
    std::ofstream(dir.path / "tasks.txt") << envs::format_grid(std::get<envs::GridTask>(first[0]));
    c.heldout_file = (dir.path / "tasks.txt").string();
    CHECK_THROWS_AS(resolve_heldout(c, training), std::invalid_argument);
    CHECK(resolve_heldout(c, {}).size() == 1);

    CHECK(disjoint_key("cartpole:continuous:1.5") == disjoint_key("cartpole:discrete:1.5"));
  }

  TEST_CASE("runs refuse missing inputs before doing work") {
    TempDir dir("metashape_missing");
    ExperimentConfig c = tiny_config(dir.path);
    CHECK_THROWS_WITH(run_kind(c, ExperimentKind::MetaTestAdapt), doctest::Contains("missing prior"));
    CHECK_FALSE(fs::exists(dir.path / "curves_meta-test-adapt.csv"));
  }

  TEST_CASE("pipeline is bit-reproducible with matched budgets") {
    TempDir a("metashape_det_a"), b("metashape_det_b");
    for (const fs::path& out : {a.path, b.path}) {
      const ExperimentConfig c = tiny_config(out);
      REQUIRE(run_kind(c, ExperimentKind::MetaTrain) == 0);
      for (const auto kind : {ExperimentKind::MetaTestAdapt, ExperimentKind::MetaTestShapingOnly,
                              ExperimentKind::BaselineMaml, ExperimentKind::BaselineUnshapedDqn}) {
        REQUIRE(run_kind(c, kind) == 0);
      }
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.path)) {
      if (e.path().extension() == ".csv" || e.path().extension() == ".ckpt") files.push_back(e.path().filename());
    }
    CHECK(files.size() >= 12);
    for (const fs::path& f : files) CHECK_MESSAGE(slurp(a.path / f) == slurp(b.path / f), f.string());

    const auto budget = [&](const std::string& name) {
      return read_curves(a.path / ("curves_" + name + ".csv"), a.path / ("budget_" + name + ".csv"));
    };
    const auto adapt = budget("meta-test-adapt");
    const auto maml = budget("baseline-maml");
    const auto shaped = budget("meta-test-shaping-only");
    const auto dqn = budget("baseline-unshaped-dqn");
    REQUIRE(adapt.size() == maml.size());
    REQUIRE(shaped.size() == dqn.size());
    for (std::size_t i = 0; i < adapt.size(); ++i) CHECK(adapt[i].env_steps == maml[i].env_steps);
    for (std::size_t i = 0; i < shaped.size(); ++i) CHECK(shaped[i].env_steps == dqn[i].env_steps);
  }
}
