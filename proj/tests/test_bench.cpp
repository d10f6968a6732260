#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qga/bench.hpp"
#include "qga/classical_ga.hpp"
#include "qga/hqga.hpp"

using namespace qga;
using namespace qga::bench;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qga_bench_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << content;
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

GenerationRecord make_record(int generation, std::uint64_t evaluations,
                             std::vector<double> fitnesses, double best_so_far) {
  GenerationRecord rec;
  rec.generation = generation;
  rec.evaluations = evaluations;
  rec.best = fitnesses.front();
  rec.worst = fitnesses.front();
  double sum = 0.0;
  for (double f : fitnesses) {
    rec.best = std::max(rec.best, f);
    rec.worst = std::min(rec.worst, f);
    sum += f;
  }
  rec.mean = sum / static_cast<double>(fitnesses.size());
  rec.fitnesses = std::move(fitnesses);
  rec.best_so_far = best_so_far;
  return rec;
}

// 12-ticker synthetic price sheet, complete rows, strictly increasing dates
std::string make_prices_csv(const fs::path& path) {
  Rng rng(555);
  const int tickers = 12;
  std::ostringstream out;
  out << "date";
  for (int i = 0; i < tickers; ++i) out << ",S" << i;
  out << "\n";
  std::vector<double> level(tickers);
  for (auto& p : level) p = 20.0 + rng.uniform_double() * 80.0;
  for (int d = 0; d < 40; ++d) {
    out << "2024-" << (d < 28 ? "01" : "02") << "-";
    const int day = d < 28 ? d + 1 : d - 27;
    if (day < 10) out << "0";
    out << day;
    for (int i = 0; i < tickers; ++i) {
      level[i] *= 1.0 + (rng.uniform_double() - 0.48) * 0.03;
      out << "," << level[i];
    }
    out << "\n";
  }
  return write_file(path, out.str());
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(QGABENCH_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("diversity is the gap between best and mean fitness") {
  CHECK(diversity(make_record(0, 3, {3.0, 1.0, 2.0}, 3.0)) == doctest::Approx(1.0));
  CHECK(diversity(make_record(0, 3, {2.5, 2.5, 2.5}, 2.5)) == 0.0);

  Rng rng(91);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> fits(5);
    for (auto& f : fits) f = rng.uniform_double() * 4.0 - 2.0;
    double best = fits[0], sum = 0.0;
    for (double f : fits) {
      best = std::max(best, f);
      sum += f;
    }
    const GenerationRecord rec = make_record(0, 5, fits, best);
    CHECK(diversity(rec) == doctest::Approx(best - sum / 5.0).epsilon(1e-12));
    CHECK(diversity(rec) >= 0.0);
  }
}

TEST_CASE("evaluations to optimum scans the best-so-far trace") {
  RunResult run;
  run.generations.push_back(make_record(0, 3, {0.1, 0.0, 0.05}, 0.1));
  run.generations.push_back(make_record(1, 6, {0.2, 0.1, 0.1}, 0.2));
  run.generations.push_back(make_record(2, 9, {0.5, 0.2, 0.1}, 0.5));
  run.generations.push_back(make_record(3, 12, {0.5, 0.5, 0.5}, 0.5));

  CHECK(evals_to_optimum(run, 0.5) == std::uint64_t{9});
  CHECK(evals_to_optimum(run, 0.1) == std::uint64_t{3});
  CHECK(evals_to_optimum(run, 0.9) == std::nullopt);
  // the tolerance forgives representation noise around the optimum
  CHECK(evals_to_optimum(run, 0.5 + 5e-13) == std::uint64_t{9});

  Rng rng(92);
  for (int trial = 0; trial < 100; ++trial) {
    RunResult synth;
    double best_so_far = -1.0;
    for (int t = 0; t < 10; ++t) {
      best_so_far = std::max(best_so_far, rng.uniform_double());
      synth.generations.push_back(
          make_record(t, 4 * (t + 1), {best_so_far}, best_so_far));
    }
    const double target = rng.uniform_double();
    std::optional<std::uint64_t> expected;
    for (const auto& rec : synth.generations) {
      if (rec.best_so_far >= target - 1e-12) {
        expected = rec.evaluations;
        break;
      }
    }
    CHECK(evals_to_optimum(synth, target) == expected);
  }
}

TEST_CASE("aggregation averages runs point by point") {
  Series a{{3, 6}, {1.0, 2.0}};
  Series b{{3, 6}, {2.0, 4.0}};
  Series c{{3, 6}, {3.0, 6.0}};
  Series d{{3, 6}, {4.0, 8.0}};
  Series e{{3, 6}, {5.0, 10.0}};
  const AggregatedSeries agg = aggregate_series({a, b, c, d, e});
  REQUIRE(agg.evaluations == std::vector<std::uint64_t>{3, 6});
  CHECK(agg.mean[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(agg.mean[1] == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(agg.stddev[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(agg.stddev[1] == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));

  const AggregatedSeries twin = aggregate_series({a, a});
  CHECK(twin.mean == a.values);
  CHECK(twin.stddev == std::vector<double>{0.0, 0.0});

  const AggregatedSeries solo = aggregate_series({b});
  CHECK(solo.mean == b.values);
  CHECK(solo.stddev == std::vector<double>{0.0, 0.0});

  CHECK_THROWS_AS(aggregate_series({}), std::runtime_error);
  CHECK_THROWS_AS(aggregate_series({a, Series{{3, 7}, {1.0, 2.0}}}),
                  std::runtime_error);
  CHECK_THROWS_AS(aggregate_series({Series{{6, 3}, {1.0, 2.0}}}),
                  std::runtime_error);
  CHECK_THROWS_AS(aggregate_series({Series{{}, {}}}), std::runtime_error);
}

TEST_CASE("statistic series extraction matches the record fields") {
  RunResult run;
  run.generations.push_back(make_record(0, 3, {0.3, 0.1, 0.2}, 0.3));
  run.generations.push_back(make_record(1, 6, {0.4, 0.4, 0.1}, 0.4));

  const Series best = extract_series(run, Statistic::Best);
  CHECK(best.evaluations == std::vector<std::uint64_t>{3, 6});
  CHECK(best.values == std::vector<double>{0.3, 0.4});
  CHECK(extract_series(run, Statistic::Worst).values ==
        std::vector<double>{0.1, 0.1});
  const Series mean = extract_series(run, Statistic::Mean);
  CHECK(mean.values[0] == doctest::Approx(0.2).epsilon(1e-14));
  const Series div = extract_series(run, Statistic::Diversity);
  CHECK(div.values[0] == doctest::Approx(0.1).epsilon(1e-12));

  const AggregatedSeries agg = aggregate({run, run}, Statistic::Best);
  CHECK(agg.mean == best.values);
}

TEST_CASE("trapezoidal area integrates a series over its grid") {
  CHECK(trapezoid_area(Series{{3, 6, 9}, {1.0, 2.0, 3.0}}) ==
        doctest::Approx(12.0).epsilon(1e-14));
  CHECK(trapezoid_area(Series{{5}, {7.0}}) == 0.0);
  CHECK(trapezoid_area(Series{{0, 10}, {2.0, 2.0}}) ==
        doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("run CSVs round-trip every field exactly") {
  const fs::path dir = fresh_dir("roundtrip");
  RunResult run;
  run.algorithm = "hqga";
  run.instance_label = "k5-s1";
  run.population = 3;
  run.seed = 42;
  run.generations.push_back(make_record(0, 3, {0.1 + 0.2, -0.05, 0.0}, 0.3));
  run.generations.push_back(make_record(1, 6, {1.0 / 3.0, 0.3, 0.3}, 1.0 / 3.0));
  const std::string path = (dir / "run.csv").string();
  write_run_csv(run, path);

  const RunCsv back = read_run_csv(path);
  CHECK(back.algorithm == "hqga");
  CHECK(back.instance == "k5-s1");
  CHECK(back.pop == 3);
  CHECK(back.seed == 42);
  REQUIRE(back.rows.size() == 2);
  for (std::size_t t = 0; t < back.rows.size(); ++t) {
    const auto& rec = run.generations[t];
    const auto& row = back.rows[t];
    CHECK(row.generation == rec.generation);
    CHECK(row.evaluations == rec.evaluations);
    CHECK(row.best == rec.best);
    CHECK(row.mean == rec.mean);
    CHECK(row.worst == rec.worst);
    CHECK(row.diversity == rec.best - rec.mean);
    CHECK(row.best_so_far == rec.best_so_far);
  }

  RunResult bad = run;
  bad.instance_label = "oops,label";
  CHECK_THROWS_AS(write_run_csv(bad, (dir / "bad.csv").string()),
                  std::runtime_error);
}

TEST_CASE("malformed run CSVs are rejected") {
  const fs::path dir = fresh_dir("badcsv");
  CHECK_THROWS_AS(read_run_csv((dir / "missing.csv").string()), std::runtime_error);

  const std::string bad_header =
      write_file(dir / "h.csv", "algo,instance\nx,y\n");
  CHECK_THROWS_AS(read_run_csv(bad_header), std::runtime_error);

  const std::string header =
      "algorithm,instance,pop,seed,generation,evaluations,best,mean,worst,"
      "diversity,best_so_far\n";
  const std::string empty = write_file(dir / "e.csv", header);
  CHECK_THROWS_AS(read_run_csv(empty), std::runtime_error);

  const std::string short_row = write_file(dir / "s.csv", header + "ga,k,3\n");
  CHECK_THROWS_AS(read_run_csv(short_row), std::runtime_error);

  const std::string mixed = write_file(
      dir / "m.csv", header + "ga,k,3,1,0,3,1,1,1,0,1\nga,k,3,2,1,6,1,1,1,0,1\n");
  CHECK_THROWS_AS(read_run_csv(mixed), std::runtime_error);

  const std::string junk = write_file(
      dir / "j.csv", header + "ga,k,3,1,0,3,abc,1,1,0,1\n");
  CHECK_THROWS_AS(read_run_csv(junk), std::runtime_error);
}

TEST_CASE("brute-force tables parse and validate") {
  const fs::path dir = fresh_dir("brutecsv");
  const std::string good = write_file(
      dir / "b.csv",
      "instance,n,best_bits,best_value,evaluations\n"
      "k5-s1,5,10100,0.25,32\n"
      "k5-s2,5,00111,0.125,32\n");
  const std::vector<BruteRow> rows = read_brute_csv(good);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].instance == "k5-s1");
  CHECK(rows[0].n == 5);
  CHECK(rows[0].best_bits == "10100");
  CHECK(rows[0].best_value == 0.25);
  CHECK(rows[0].evaluations == 32);

  const std::string bad = write_file(dir / "bad.csv", "nope\n");
  CHECK_THROWS_AS(read_brute_csv(bad), std::runtime_error);
  CHECK_THROWS_AS(read_brute_csv((dir / "missing.csv").string()),
                  std::runtime_error);
}

TEST_CASE("experiment configs parse with path resolution and defaults") {
  const fs::path dir = fresh_dir("config");
  write_file(dir / "inst" / "a.json", "{}");
  const std::string path = write_file(dir / "exp.json", R"({
    "instances": ["inst/a.json"],
    "repetitions": 3,
    "budget": 60,
    "base_seed": 7,
    "algorithms": [
      {"name": "hqga", "populations": [3, 5], "elitism": "reinforcement",
       "epsilon": 0.2, "p_m": 0.2},
      {"name": "ga", "populations": [10], "p_c": 0.8, "elite_count": 2}
    ]
  })");
  const ExperimentConfig config = load_experiment_config(path);
  REQUIRE(config.instances.size() == 1);
  CHECK(config.instances[0] == (dir / "inst" / "a.json").string());
  CHECK_FALSE(config.sample.has_value());
  CHECK(config.repetitions == 3);
  CHECK(config.budget == 60);
  CHECK(config.base_seed == 7);
  REQUIRE(config.algorithms.size() == 2);
  CHECK(config.algorithms[0].name == "hqga");
  CHECK(config.algorithms[0].populations == std::vector<int>{3, 5});
  CHECK(config.algorithms[0].elitism == "reinforcement");
  CHECK(config.algorithms[0].epsilon == 0.2);
  CHECK(config.algorithms[0].p_m == 0.2);
  CHECK(config.algorithms[0].theta_m == kPi / 2.0);
  CHECK(config.algorithms[1].name == "ga");
  CHECK(config.algorithms[1].p_c == 0.8);
  CHECK(config.algorithms[1].elite_count == 2);
  CHECK_FALSE(config.algorithms[1].p_m_bit.has_value());

  const std::string sampled = write_file(dir / "sampled.json", R"({
    "sample": {"prices": "prices.csv", "k": 5, "gamma": 0.5,
               "subset_seeds": [1, 2]},
    "algorithms": [{"name": "ga", "populations": [4]}]
  })");
  const ExperimentConfig sc = load_experiment_config(sampled);
  REQUIRE(sc.sample.has_value());
  CHECK(sc.sample->prices == (dir / "prices.csv").string());
  CHECK(sc.sample->k == 5);
  CHECK(sc.sample->gamma == 0.5);
  CHECK(sc.sample->subset_seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(sc.repetitions == 1);
  CHECK(sc.budget == 512);
}

TEST_CASE("broken experiment configs are rejected with diagnostics") {
  const fs::path dir = fresh_dir("badconfig");
  CHECK_THROWS_AS(load_experiment_config((dir / "missing.json").string()),
                  std::runtime_error);

  const std::string not_json = write_file(dir / "nj.json", "{{{");
  CHECK_THROWS_WITH_AS(load_experiment_config(not_json),
                       doctest::Contains("invalid config JSON"),
                       std::runtime_error);

  const std::string no_alg = write_file(
      dir / "na.json", R"({"instances": ["a.json"]})");
  CHECK_THROWS_AS(load_experiment_config(no_alg), std::runtime_error);

  const std::string bad_alg = write_file(
      dir / "ba.json",
      R"({"instances": ["a.json"],
          "algorithms": [{"name": "annealer", "populations": [3]}]})");
  CHECK_THROWS_WITH_AS(load_experiment_config(bad_alg),
                       doctest::Contains("unknown algorithm"),
                       std::runtime_error);

  const std::string bad_mode = write_file(
      dir / "bm.json",
      R"({"instances": ["a.json"],
          "algorithms": [{"name": "hqga", "populations": [3],
                          "elitism": "psychic"}]})");
  CHECK_THROWS_WITH_AS(load_experiment_config(bad_mode),
                       doctest::Contains("unknown elitism"),
                       std::runtime_error);

  const std::string no_source = write_file(
      dir / "ns.json", R"({"algorithms": [{"name": "ga", "populations": [3]}]})");
  CHECK_THROWS_AS(load_experiment_config(no_source), std::runtime_error);

  const std::string bad_reps = write_file(
      dir / "br.json",
      R"({"instances": ["a.json"], "repetitions": 0,
          "algorithms": [{"name": "ga", "populations": [3]}]})");
  CHECK_THROWS_AS(load_experiment_config(bad_reps), std::runtime_error);
}

TEST_CASE("instance preparation is deterministic") {
  const fs::path dir = fresh_dir("prepare");
  const std::string prices = make_prices_csv(dir / "prices.csv");

  PrepareOptions options;
  options.prices_csv = prices;
  options.k = 5;
  options.gamma = 1.0;
  options.subset_seeds = {1, 2, 3};
  options.out_dir = (dir / "instances_a").string();
  const PrepareResult a = run_prepare(options);
  REQUIRE(a.instance_paths.size() == 3);
  CHECK(a.dropped_rows == 0);
  CHECK(fs::path(a.instance_paths[0]).filename() == "k5-s1.json");
  CHECK(fs::path(a.instance_paths[1]).filename() == "k5-s2.json");
  CHECK(fs::path(a.instance_paths[2]).filename() == "k5-s3.json");
  for (const std::string& p : a.instance_paths) {
    const ProblemInstance inst = load_instance(p);
    CHECK(inst.dimension() == 5);
    CHECK(inst.gamma == 1.0);
  }

  options.out_dir = (dir / "instances_b").string();
  const PrepareResult b = run_prepare(options);
  for (std::size_t i = 0; i < a.instance_paths.size(); ++i) {
    CHECK(read_file(a.instance_paths[i]) == read_file(b.instance_paths[i]));
  }

  options.subset_seeds = {};
  CHECK_THROWS_AS(run_prepare(options), std::runtime_error);
}

TEST_CASE("the exhaustive table lists every instance optimum") {
  const fs::path dir = fresh_dir("brute");
  const std::string prices = make_prices_csv(dir / "prices.csv");
  PrepareOptions prep;
  prep.prices_csv = prices;
  prep.k = 5;
  prep.gamma = 1.0;
  prep.subset_seeds = {2, 1};
  prep.out_dir = (dir / "instances").string();
  run_prepare(prep);

  BruteOptions options;
  options.instances_dir = prep.out_dir;
  options.out_csv = (dir / "brute.csv").string();
  run_brute(options);

  const std::vector<BruteRow> rows = read_brute_csv(options.out_csv);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].instance == "k5-s1");  // sorted by label, not by seed order
  CHECK(rows[1].instance == "k5-s2");
  for (const BruteRow& row : rows) {
    CHECK(row.n == 5);
    CHECK(row.evaluations == 32);
    const ProblemInstance inst =
        load_instance((fs::path(prep.out_dir) / (row.instance + ".json")).string());
    const BruteForceResult direct = brute_force(inst);
    CHECK(row.best_value == direct.best_value);
    REQUIRE(row.best_bits.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK((row.best_bits[i] - '0') == direct.best[i]);
    }
  }

  BruteOptions empty;
  empty.instances_dir = (dir / "nowhere").string();
  empty.out_csv = (dir / "x.csv").string();
  CHECK_THROWS_AS(run_brute(empty), std::runtime_error);
}

TEST_CASE("experiment cells run to completion under any thread count") {
  const fs::path dir = fresh_dir("run");
  const std::string prices = make_prices_csv(dir / "prices.csv");
  const std::string config = write_file(dir / "exp.json", R"({
    "sample": {"prices": "prices.csv", "k": 5, "gamma": 1.0,
               "subset_seeds": [1]},
    "repetitions": 2,
    "budget": 30,
    "base_seed": 11,
    "algorithms": [
      {"name": "hqga", "populations": [3]},
      {"name": "ga", "populations": [3]}
    ]
  })");

  RunOptions serial;
  serial.config_path = config;
  serial.out_dir = (dir / "runs_serial").string();
  serial.threads = 1;
  run_experiments(serial);

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(serial.out_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      names.push_back(entry.path().filename().string());
    }
  }
  CHECK(names.size() == 4);  // 2 algorithms x 1 instance x 1 pop x 2 reps
  for (const std::string& name : names) {
    const RunCsv run = read_run_csv((fs::path(serial.out_dir) / name).string());
    CHECK(run.instance == "k5-s1");
    CHECK(run.pop == 3);
    CHECK(run.rows.back().evaluations <= 30);
    const std::string expected = run.algorithm + "_" + run.instance + "_pop3_seed" +
                                 std::to_string(run.seed) + ".csv";
    CHECK(name == expected);
  }

  RunOptions parallel = serial;
  parallel.out_dir = (dir / "runs_parallel").string();
  parallel.threads = 4;
  run_experiments(parallel);
  std::sort(names.begin(), names.end());
  for (const std::string& name : names) {
    CHECK(read_file((fs::path(serial.out_dir) / name).string()) ==
          read_file((fs::path(parallel.out_dir) / name).string()));
  }

  RunOptions broken = serial;
  broken.config_path = write_file(dir / "broken.json", R"({
    "instances": ["does_not_exist.json"],
    "algorithms": [{"name": "ga", "populations": [3]}]
  })");
  broken.out_dir = (dir / "runs_broken").string();
  CHECK_THROWS_AS(run_experiments(broken), std::runtime_error);
}

TEST_CASE("reports aggregate the run directory into plot-ready tables") {
  const fs::path dir = fresh_dir("report");
  const std::string prices = make_prices_csv(dir / "prices.csv");
  const std::string config = write_file(dir / "exp.json", R"({
    "sample": {"prices": "prices.csv", "k": 5, "gamma": 1.0,
               "subset_seeds": [1, 2]},
    "repetitions": 3,
    "budget": 36,
    "base_seed": 5,
    "algorithms": [
      {"name": "hqga", "populations": [3]},
      {"name": "ga", "populations": [3]}
    ]
  })");
  RunOptions run_options;
  run_options.config_path = config;
  run_options.out_dir = (dir / "runs").string();
  run_options.threads = 2;
  run_experiments(run_options);

  BruteOptions brute_options;
  brute_options.instances_dir = (fs::path(run_options.out_dir) / "instances").string();
  brute_options.out_csv = (dir / "brute.csv").string();
  run_brute(brute_options);

  ReportOptions report;
  report.runs_dir = run_options.out_dir;
  report.brute_csv = brute_options.out_csv;
  report.out_dir = (dir / "tables").string();
  run_report(report);

  for (const std::string stat : {"best", "mean", "worst", "diversity"}) {
    const std::vector<std::string> lines =
        read_lines((fs::path(report.out_dir) / (stat + ".csv")).string());
    REQUIRE(lines.size() >= 3);
    CHECK(lines[0][0] == '#');  // documents the standard-deviation convention
    CHECK(lines[1] == "instance,algorithm,pop,evaluations,stat_mean,stat_std");
  }

  // recompute the aggregated best table by hand from the run files
  std::map<std::string, std::map<std::uint64_t, std::vector<double>>> best_by_group;
  for (const auto& entry : fs::directory_iterator(run_options.out_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const RunCsv run = read_run_csv(entry.path().string());
    const std::string key = run.instance + "," + run.algorithm + ",3";
    for (const RunCsvRow& row : run.rows) {
      best_by_group[key][row.evaluations].push_back(row.best);
    }
  }
  const std::vector<std::string> best_lines =
      read_lines((fs::path(report.out_dir) / "best.csv").string());
  std::size_t data_rows = 0;
  for (std::size_t i = 2; i < best_lines.size(); ++i) {
    const std::vector<std::string> f = split(best_lines[i]);
    REQUIRE(f.size() == 6);
    const std::string key = f[0] + "," + f[1] + "," + f[2];
    const std::uint64_t evals = std::stoull(f[3]);
    REQUIRE(best_by_group.count(key) == 1);
    REQUIRE(best_by_group[key].count(evals) == 1);
    const std::vector<double>& values = best_by_group[key][evals];
    CHECK(values.size() == 3);
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    const double stddev = std::sqrt(sq / static_cast<double>(values.size()));
    CHECK(std::stod(f[4]) == doctest::Approx(mean).epsilon(1e-14));
    CHECK(std::stod(f[5]) == doctest::Approx(stddev).epsilon(1e-12));
    ++data_rows;
  }
  // 4 groups (2 instances x 2 algorithms), each with its own grid
  CHECK(data_rows > 0);

  // diversity means are never negative
  const std::vector<std::string> div_lines =
      read_lines((fs::path(report.out_dir) / "diversity.csv").string());
  for (std::size_t i = 2; i < div_lines.size(); ++i) {
    CHECK(std::stod(split(div_lines[i])[4]) >= 0.0);
  }

  // the optimum summary counts successes against the brute-force values
  const std::vector<std::string> opt_lines =
      read_lines((fs::path(report.out_dir) / "evals_to_optimum.csv").string());
  REQUIRE(opt_lines.size() == 5);  // header + 4 groups
  CHECK(opt_lines[0] ==
        "instance,algorithm,pop,runs,reached,reach_rate,median_evals_to_optimum");
  std::map<std::string, double> f_star;
  for (const BruteRow& row : read_brute_csv(brute_options.out_csv)) {
    f_star[row.instance] = row.best_value;
  }
  for (std::size_t i = 1; i < opt_lines.size(); ++i) {
    const std::vector<std::string> f = split(opt_lines[i]);
    REQUIRE(f.size() == 7);
    CHECK(f[3] == "3");
    std::vector<std::uint64_t> successes;
    for (const auto& entry : fs::directory_iterator(run_options.out_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
      const RunCsv run = read_run_csv(entry.path().string());
      if (run.instance != f[0] || run.algorithm != f[1]) continue;
      for (const RunCsvRow& row : run.rows) {
        if (row.best_so_far >= f_star[run.instance] - 1e-12) {
          successes.push_back(row.evaluations);
          break;
        }
      }
    }
    CHECK(f[4] == std::to_string(successes.size()));
    const double rate = successes.size() / 3.0;
    CHECK(std::stod(f[5]) == doctest::Approx(rate).epsilon(1e-15));
    if (successes.empty()) {
      CHECK(f[6].empty());
    } else {
      std::sort(successes.begin(), successes.end());
      const std::size_t m = successes.size();
      const double median =
          m % 2 == 1 ? static_cast<double>(successes[m / 2])
                     : 0.5 * (static_cast<double>(successes[m / 2 - 1]) +
                              static_cast<double>(successes[m / 2]));
      CHECK(std::stod(f[6]) == doctest::Approx(median).epsilon(1e-15));
    }
  }

  // an instance absent from the brute table is an error
  const std::string partial = write_file(
      dir / "partial.csv",
      "instance,n,best_bits,best_value,evaluations\nother,5,00000,0,32\n");
  ReportOptions broken = report;
  broken.brute_csv = partial;
  broken.out_dir = (dir / "tables_broken").string();
  CHECK_THROWS_WITH_AS(run_report(broken), doctest::Contains("missing"),
                       std::runtime_error);
}

TEST_CASE("the whole pipeline is byte-identical across executions") {
  const fs::path dir = fresh_dir("pipeline");
  const std::string prices = make_prices_csv(dir / "prices.csv");
  const std::string config = write_file(dir / "exp.json", R"({
    "sample": {"prices": "prices.csv", "k": 5, "gamma": 1.0,
               "subset_seeds": [1, 2]},
    "repetitions": 2,
    "budget": 24,
    "base_seed": 99,
    "algorithms": [
      {"name": "hqga", "populations": [3]},
      {"name": "ga", "populations": [3]}
    ]
  })");

  auto pipeline = [&](const std::string& tag) {
    RunOptions run_options;
    run_options.config_path = config;
    run_options.out_dir = (dir / (tag + "_runs")).string();
    run_options.threads = 3;
    run_experiments(run_options);
    BruteOptions brute_options;
    brute_options.instances_dir =
        (fs::path(run_options.out_dir) / "instances").string();
    brute_options.out_csv = (dir / (tag + "_brute.csv")).string();
    run_brute(brute_options);
    ReportOptions report;
    report.runs_dir = run_options.out_dir;
    report.brute_csv = brute_options.out_csv;
    report.out_dir = (dir / (tag + "_tables")).string();
    run_report(report);
    return report.out_dir;
  };

  const std::string a = pipeline("a");
  const std::string b = pipeline("b");
  CHECK(read_file((dir / "a_brute.csv").string()) ==
        read_file((dir / "b_brute.csv").string()));
  for (const std::string name :
       {"best.csv", "mean.csv", "worst.csv", "diversity.csv",
        "evals_to_optimum.csv"}) {
    CHECK(read_file((fs::path(a) / name).string()) ==
          read_file((fs::path(b) / name).string()));
  }
  for (const auto& entry : fs::directory_iterator((dir / "a_runs").string())) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path twin = dir / "b_runs" / entry.path().filename();
    CHECK(read_file(entry.path().string()) == read_file(twin.string()));
  }
}

TEST_CASE("the command line maps outcomes onto exit codes") {
  const fs::path dir = fresh_dir("cli");
  const std::string prices = make_prices_csv(dir / "prices.csv");

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("prepare --help") == 0);
  CHECK(run_cli("") == 1);                       // missing subcommand
  CHECK(run_cli("transmogrify") == 1);           // unknown subcommand
  CHECK(run_cli("prepare --prices x.csv") == 1); // missing required options

  const std::string inst_dir = (dir / "instances").string();
  CHECK(run_cli("prepare --prices " + prices + " --k 5 --gamma 1.0" +
                " --subset-seeds 1,2 --out " + inst_dir) == 0);
  CHECK(fs::exists(fs::path(inst_dir) / "k5-s1.json"));
  CHECK(fs::exists(fs::path(inst_dir) / "k5-s2.json"));

  // data errors exit with 2
  CHECK(run_cli("prepare --prices " + (dir / "nope.csv").string() +
                " --k 5 --gamma 1.0 --subset-seeds 1 --out " + inst_dir) == 2);
  CHECK(run_cli("prepare --prices " + prices + " --k 99 --gamma 1.0" +
                " --subset-seeds 1 --out " + inst_dir) == 2);

  const std::string brute_csv = (dir / "brute.csv").string();
  CHECK(run_cli("brute --instances " + inst_dir + " --out " + brute_csv) == 0);
  CHECK(fs::exists(brute_csv));
  CHECK(run_cli("brute --instances " + (dir / "void").string() + " --out " +
                brute_csv) == 2);

  const std::string config = write_file(dir / "exp.json", R"({
    "instances": ["instances/k5-s1.json", "instances/k5-s2.json"],
    "repetitions": 2,
    "budget": 24,
    "base_seed": 3,
    "algorithms": [
      {"name": "hqga", "populations": [3]},
      {"name": "ga", "populations": [3]}
    ]
  })");
  const std::string runs_dir = (dir / "runs").string();
  CHECK(run_cli("run --config " + config + " --out " + runs_dir +
                " --threads 2") == 0);
  std::size_t run_files = 0;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") ++run_files;
  }
  CHECK(run_files == 8);  // 2 algorithms x 2 instances x 2 reps

  const std::string tables_dir = (dir / "tables").string();
  CHECK(run_cli("report --runs " + runs_dir + " --brute " + brute_csv +
                " --out " + tables_dir) == 0);
  CHECK(fs::exists(fs::path(tables_dir) / "best.csv"));
  CHECK(fs::exists(fs::path(tables_dir) / "evals_to_optimum.csv"));
  CHECK(run_cli("report --runs " + (dir / "void").string() + " --brute " +
                brute_csv + " --out " + tables_dir) == 2);
}
