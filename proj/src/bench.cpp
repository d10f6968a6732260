#include "qga/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace qga::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("bad " + what + " value: " + s);
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("bad " + what + " value: " + s);
  }
  return v;
}

void check_csv_safe(const std::string& s, const std::string& what) {
  if (s.empty() || s.find_first_of(",\r\n") != std::string::npos) {
    throw std::runtime_error(what + " is empty or contains a comma/newline: " + s);
  }
}

constexpr const char* kRunHeader =
    "algorithm,instance,pop,seed,generation,evaluations,best,mean,worst,"
    "diversity,best_so_far";

constexpr const char* kBruteHeader = "instance,n,best_bits,best_value,evaluations";

constexpr const char* kAggHeader =
    "instance,algorithm,pop,evaluations,stat_mean,stat_std";

constexpr const char* kOptimumHeader =
    "instance,algorithm,pop,runs,reached,reach_rate,median_evals_to_optimum";

std::vector<std::string> sorted_files_with_extension(const std::string& dir,
                                                     const std::string& ext) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace

double diversity(const GenerationRecord& record) {
  // best >= mean mathematically; summation rounding can undershoot by an ulp
  return std::max(0.0, record.best - record.mean);
}

std::optional<std::uint64_t> evals_to_optimum(const RunResult& run, double f_star) {
  for (const GenerationRecord& rec : run.generations) {
    if (rec.best_so_far >= f_star - 1e-12) return rec.evaluations;
  }
  return std::nullopt;
}

Series extract_series(const RunResult& run, Statistic stat) {
  Series s;
  s.evaluations.reserve(run.generations.size());
  s.values.reserve(run.generations.size());
  for (const GenerationRecord& rec : run.generations) {
    s.evaluations.push_back(rec.evaluations);
    switch (stat) {
      case Statistic::Best: s.values.push_back(rec.best); break;
      case Statistic::Mean: s.values.push_back(rec.mean); break;
      case Statistic::Worst: s.values.push_back(rec.worst); break;
      case Statistic::Diversity: s.values.push_back(diversity(rec)); break;
    }
  }
  return s;
}

AggregatedSeries aggregate_series(const std::vector<Series>& series) {
  if (series.empty()) throw std::runtime_error("nothing to aggregate");
  const std::vector<std::uint64_t>& grid = series.front().evaluations;
  if (grid.empty()) throw std::runtime_error("empty evaluation grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) {
      throw std::runtime_error("evaluation grid not strictly increasing");
    }
  }
  for (const Series& s : series) {
    if (s.evaluations != grid) throw std::runtime_error("mismatched evaluation grids");
    if (s.values.size() != grid.size()) throw std::runtime_error("series length mismatch");
  }

  AggregatedSeries out;
  out.evaluations = grid;
  out.mean.resize(grid.size());
  out.stddev.resize(grid.size());
  const double r = static_cast<double>(series.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double sum = 0.0;
    for (const Series& s : series) sum += s.values[p];
    const double mean = sum / r;
    double sq = 0.0;
    for (const Series& s : series) {
      const double d = s.values[p] - mean;
      sq += d * d;
    }
    out.mean[p] = mean;
    out.stddev[p] = std::sqrt(sq / r);  // population, not sample
  }
  return out;
}

AggregatedSeries aggregate(const std::vector<RunResult>& runs, Statistic stat) {
  std::vector<Series> series;
  series.reserve(runs.size());
  for (const RunResult& run : runs) series.push_back(extract_series(run, stat));
  return aggregate_series(series);
}

double trapezoid_area(const Series& series) {
  double area = 0.0;
  for (std::size_t i = 1; i < series.evaluations.size(); ++i) {
    const double dx = static_cast<double>(series.evaluations[i]) -
                      static_cast<double>(series.evaluations[i - 1]);
    area += dx * 0.5 * (series.values[i] + series.values[i - 1]);
  }
  return area;
}

void write_run_csv(const RunResult& run, const std::string& path) {
  check_csv_safe(run.algorithm, "algorithm name");
  check_csv_safe(run.instance_label, "instance label");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run file: " + path);
  out << kRunHeader << "\n";
  for (const GenerationRecord& rec : run.generations) {
    out << run.algorithm << ',' << run.instance_label << ',' << run.population
        << ',' << run.seed << ',' << rec.generation << ',' << rec.evaluations
        << ',' << fmt17(rec.best) << ',' << fmt17(rec.mean) << ','
        << fmt17(rec.worst) << ',' << fmt17(diversity(rec)) << ','
        << fmt17(rec.best_so_far) << "\n";
  }
}

RunCsv read_run_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run file: " + path);
  std::string line;
  if (!std::getline(in, line) || split_fields(line) != split_fields(kRunHeader)) {
    throw std::runtime_error("bad run CSV header in " + path);
  }
  RunCsv run;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 11) throw std::runtime_error("bad run CSV row in " + path);
    if (first) {
      run.algorithm = f[0];
      run.instance = f[1];
      run.pop = static_cast<int>(parse_u64(f[2], "pop"));
      run.seed = parse_u64(f[3], "seed");
      first = false;
    } else if (run.algorithm != f[0] || run.instance != f[1] ||
               run.pop != static_cast<int>(parse_u64(f[2], "pop")) ||
               run.seed != parse_u64(f[3], "seed")) {
      throw std::runtime_error("inconsistent run identity in " + path);
    }
    RunCsvRow row;
    row.generation = static_cast<int>(parse_u64(f[4], "generation"));
    row.evaluations = parse_u64(f[5], "evaluations");
    row.best = parse_double(f[6], "best");
    row.mean = parse_double(f[7], "mean");
    row.worst = parse_double(f[8], "worst");
    row.diversity = parse_double(f[9], "diversity");
    row.best_so_far = parse_double(f[10], "best_so_far");
    run.rows.push_back(row);
  }
  if (run.rows.empty()) throw std::runtime_error("run CSV has no rows: " + path);
  return run;
}

std::vector<BruteRow> read_brute_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open brute-force table: " + path);
  std::string line;
  if (!std::getline(in, line) || split_fields(line) != split_fields(kBruteHeader)) {
    throw std::runtime_error("bad brute-force CSV header in " + path);
  }
  std::vector<BruteRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 5) throw std::runtime_error("bad brute-force CSV row in " + path);
    BruteRow row;
    row.instance = f[0];
    row.n = static_cast<int>(parse_u64(f[1], "n"));
    row.best_bits = f[2];
    row.best_value = parse_double(f[3], "best_value");
    row.evaluations = parse_u64(f[4], "evaluations");
    rows.push_back(row);
  }
  return rows;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid config JSON in " + path + ": " + e.what());
  }

  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  ExperimentConfig config;
  try {
    if (j.contains("instances")) {
      for (const auto& p : j.at("instances")) {
        config.instances.push_back(resolve(p.get<std::string>()));
      }
    }
    if (j.contains("sample")) {
      const json& s = j.at("sample");
      SampleSpec spec;
      spec.prices = resolve(s.at("prices").get<std::string>());
      spec.k = s.at("k").get<std::size_t>();
      spec.gamma = s.value("gamma", 1.0);
      spec.subset_seeds = s.at("subset_seeds").get<std::vector<std::uint64_t>>();
      config.sample = std::move(spec);
    }
    config.repetitions = j.value("repetitions", 1);
    config.budget = j.value("budget", std::uint64_t{512});
    config.base_seed = j.value("base_seed", std::uint64_t{0});
    for (const auto& a : j.at("algorithms")) {
      AlgorithmSpec spec;
      spec.name = a.at("name").get<std::string>();
      spec.populations = a.at("populations").get<std::vector<int>>();
      spec.p_m = a.value("p_m", spec.p_m);
      spec.theta_m = a.value("theta_m", spec.theta_m);
      spec.p_e = a.value("p_e", spec.p_e);
      spec.elitism = a.value("elitism", spec.elitism);
      spec.epsilon = a.value("epsilon", spec.epsilon);
      spec.p_c = a.value("p_c", spec.p_c);
      if (a.contains("p_m_bit")) spec.p_m_bit = a.at("p_m_bit").get<double>();
      spec.tournament_size = a.value("tournament_size", spec.tournament_size);
      spec.elite_count = a.value("elite_count", spec.elite_count);
      config.algorithms.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("config schema mismatch in " + path + ": " + e.what());
  }

  if (config.instances.empty() && !config.sample) {
    throw std::runtime_error("config needs \"instances\" or \"sample\"");
  }
  if (config.repetitions < 1) throw std::runtime_error("repetitions must be >= 1");
  if (config.algorithms.empty()) throw std::runtime_error("config lists no algorithms");
  for (const AlgorithmSpec& a : config.algorithms) {
    if (a.name != "hqga" && a.name != "ga") {
      throw std::runtime_error("unknown algorithm: " + a.name);
    }
    if (a.populations.empty()) {
      throw std::runtime_error("algorithm " + a.name + " lists no populations");
    }
    if (a.name == "hqga" && a.elitism != "pure" && a.elitism != "reinforcement" &&
        a.elitism != "deterministic") {
      throw std::runtime_error("unknown elitism mode: " + a.elitism);
    }
  }
  return config;
}

PrepareResult run_prepare(const PrepareOptions& options) {
  if (options.subset_seeds.empty()) throw std::runtime_error("no subset seeds given");
  const PriceLoadResult loaded = load_prices(options.prices_csv);
  const ReturnTable returns = compute_returns(loaded.table);
  const MomentEstimate moments = estimate_moments(returns);
  MarketUniverse universe{loaded.table.tickers, moments.mu, moments.sigma};

  fs::create_directories(options.out_dir);
  PrepareResult result;
  result.dropped_rows = loaded.dropped_rows;
  for (std::uint64_t seed : options.subset_seeds) {
    const ProblemInstance inst =
        sample_instance(universe, options.k, options.gamma, seed);
    const std::string path =
        (fs::path(options.out_dir) / (inst.label + ".json")).string();
    save_instance(inst, path);
    result.instance_paths.push_back(path);
  }
  return result;
}

void run_brute(const BruteOptions& options) {
  const std::vector<std::string> files =
      sorted_files_with_extension(options.instances_dir, ".json");
  if (files.empty()) {
    throw std::runtime_error("no instance files in " + options.instances_dir);
  }
  std::vector<BruteRow> rows;
  for (const std::string& file : files) {
    const ProblemInstance inst = load_instance(file);
    const BruteForceResult bf = brute_force(inst);
    BruteRow row;
    row.instance = inst.label;
    row.n = static_cast<int>(inst.dimension());
    row.best_bits.reserve(bf.best.size());
    for (std::uint8_t b : bf.best) row.best_bits += (b ? '1' : '0');
    row.best_value = bf.best_value;
    row.evaluations = bf.evaluations;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const BruteRow& a, const BruteRow& b) { return a.instance < b.instance; });

  if (fs::path(options.out_csv).has_parent_path()) {
    fs::create_directories(fs::path(options.out_csv).parent_path());
  }
  std::ofstream out(options.out_csv);
  if (!out) throw std::runtime_error("cannot write brute-force table: " + options.out_csv);
  out << kBruteHeader << "\n";
  for (const BruteRow& row : rows) {
    check_csv_safe(row.instance, "instance label");
    out << row.instance << ',' << row.n << ',' << row.best_bits << ','
        << fmt17(row.best_value) << ',' << row.evaluations << "\n";
  }
}

namespace {

struct Cell {
  std::size_t algorithm_index = 0;
  std::size_t instance_index = 0;
  int population = 0;
  int repetition = 0;
  std::uint64_t seed = 0;
};

RunResult execute_cell(const ExperimentConfig& config,
                       const std::vector<ProblemInstance>& instances,
                       const Cell& cell) {
  const AlgorithmSpec& alg = config.algorithms[cell.algorithm_index];
  const ProblemInstance& inst = instances[cell.instance_index];
  if (alg.name == "hqga") {
    HqgaConfig hc;
    hc.population = cell.population;
    hc.mutation_prob = alg.p_m;
    hc.mutation_angle = alg.theta_m;
    hc.entangle_prob = alg.p_e;
    if (alg.elitism == "pure") {
      hc.elitism = ElitismMode::pure();
    } else if (alg.elitism == "reinforcement") {
      hc.elitism = ElitismMode::reinforcement(alg.epsilon);
    } else {
      hc.elitism = ElitismMode::deterministic();
    }
    hc.max_evaluations = config.budget;
    hc.seed = cell.seed;
    return run_hqga(inst, hc);
  }
  GaConfig gc;
  gc.population = cell.population;
  gc.crossover_prob = alg.p_c;
  gc.bit_flip_prob = alg.p_m_bit;
  gc.tournament_size = alg.tournament_size;
  gc.elite_count = alg.elite_count;
  gc.max_evaluations = config.budget;
  gc.seed = cell.seed;
  return run_ga(inst, gc);
}

}  // namespace

void run_experiments(const RunOptions& options) {
  ExperimentConfig config = load_experiment_config(options.config_path);

  fs::create_directories(options.out_dir);
  std::vector<std::string> instance_paths = config.instances;
  if (config.sample) {
    PrepareOptions prep;
    prep.prices_csv = config.sample->prices;
    prep.k = config.sample->k;
    prep.gamma = config.sample->gamma;
    prep.subset_seeds = config.sample->subset_seeds;
    prep.out_dir = (fs::path(options.out_dir) / "instances").string();
    const PrepareResult prepared = run_prepare(prep);
    instance_paths.insert(instance_paths.end(), prepared.instance_paths.begin(),
                          prepared.instance_paths.end());
  }

  std::vector<ProblemInstance> instances;
  std::set<std::string> labels;
  for (const std::string& path : instance_paths) {
    instances.push_back(load_instance(path));
    if (!labels.insert(instances.back().label).second) {
      throw std::runtime_error("duplicate instance label: " + instances.back().label);
    }
  }

  std::vector<Cell> cells;
  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    for (std::size_t ii = 0; ii < instances.size(); ++ii) {
      for (int pop : config.algorithms[ai].populations) {
        for (int rep = 0; rep < config.repetitions; ++rep) {
          Cell cell;
          cell.algorithm_index = ai;
          cell.instance_index = ii;
          cell.population = pop;
          cell.repetition = rep;
          cell.seed = derive_seed(config.base_seed,
                                  {static_cast<std::uint64_t>(ai),
                                   static_cast<std::uint64_t>(ii),
                                   static_cast<std::uint64_t>(pop),
                                   static_cast<std::uint64_t>(rep)});
          cells.push_back(cell);
        }
      }
    }
  }

  unsigned thread_count = options.threads;
  if (thread_count == 0) thread_count = std::max(1u, std::thread::hardware_concurrency());
  thread_count = std::min<unsigned>(thread_count, cells.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const RunResult run = execute_cell(config, instances, cells[i]);
        const std::string name = run.algorithm + "_" + run.instance_label +
                                 "_pop" + std::to_string(run.population) +
                                 "_seed" + std::to_string(run.seed) + ".csv";
        write_run_csv(run, (fs::path(options.out_dir) / name).string());
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
        return;
      }
    }
  };

  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (unsigned t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);
}

namespace {

double median_of(std::vector<std::uint64_t> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return static_cast<double>(values[n / 2]);
  return 0.5 * (static_cast<double>(values[n / 2 - 1]) +
                static_cast<double>(values[n / 2]));
}

}  // namespace

void run_report(const ReportOptions& options) {
  const std::vector<BruteRow> brute = read_brute_csv(options.brute_csv);
  std::map<std::string, double> optimum;
  for (const BruteRow& row : brute) optimum[row.instance] = row.best_value;

  const std::vector<std::string> files =
      sorted_files_with_extension(options.runs_dir, ".csv");
  if (files.empty()) throw std::runtime_error("no run files in " + options.runs_dir);

  using GroupKey = std::tuple<std::string, std::string, int>;  // instance, algorithm, pop
  std::map<GroupKey, std::vector<RunCsv>> groups;
  for (const std::string& file : files) {
    RunCsv run = read_run_csv(file);
    groups[{run.instance, run.algorithm, run.pop}].push_back(std::move(run));
  }
  for (auto& [key, runs] : groups) {
    std::sort(runs.begin(), runs.end(),
              [](const RunCsv& a, const RunCsv& b) { return a.seed < b.seed; });
  }

  fs::create_directories(options.out_dir);

  const std::vector<std::pair<std::string, Statistic>> stats = {
      {"best", Statistic::Best},
      {"mean", Statistic::Mean},
      {"worst", Statistic::Worst},
      {"diversity", Statistic::Diversity},
  };
  for (const auto& [stat_name, stat] : stats) {
    std::ofstream out((fs::path(options.out_dir) / (stat_name + ".csv")).string());
    if (!out) throw std::runtime_error("cannot write report file: " + stat_name);
    out << "# stat_std is the population standard deviation across repetitions\n";
    out << kAggHeader << "\n";
    for (const auto& [key, runs] : groups) {
      std::vector<Series> series;
      series.reserve(runs.size());
      for (const RunCsv& run : runs) {
        Series s;
        s.evaluations.reserve(run.rows.size());
        s.values.reserve(run.rows.size());
        for (const RunCsvRow& row : run.rows) {
          s.evaluations.push_back(row.evaluations);
          switch (stat) {
            case Statistic::Best: s.values.push_back(row.best); break;
            case Statistic::Mean: s.values.push_back(row.mean); break;
            case Statistic::Worst: s.values.push_back(row.worst); break;
            case Statistic::Diversity: s.values.push_back(row.diversity); break;
          }
        }
        series.push_back(std::move(s));
      }
      const AggregatedSeries agg = aggregate_series(series);
      for (std::size_t p = 0; p < agg.evaluations.size(); ++p) {
        out << std::get<0>(key) << ',' << std::get<1>(key) << ','
            << std::get<2>(key) << ',' << agg.evaluations[p] << ','
            << fmt17(agg.mean[p]) << ',' << fmt17(agg.stddev[p]) << "\n";
      }
    }
  }

  std::ofstream out((fs::path(options.out_dir) / "evals_to_optimum.csv").string());
  if (!out) throw std::runtime_error("cannot write evals_to_optimum.csv");
  out << kOptimumHeader << "\n";
  for (const auto& [key, runs] : groups) {
    const std::string& instance = std::get<0>(key);
    const auto it = optimum.find(instance);
    if (it == optimum.end()) {
      throw std::runtime_error("instance missing from brute-force table: " + instance);
    }
    const double f_star = it->second;
    std::vector<std::uint64_t> successes;
    for (const RunCsv& run : runs) {
      for (const RunCsvRow& row : run.rows) {
        if (row.best_so_far >= f_star - 1e-12) {
          successes.push_back(row.evaluations);
          break;
        }
      }
    }
    out << instance << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << runs.size() << ',' << successes.size() << ','
        << fmt17(static_cast<double>(successes.size()) /
                 static_cast<double>(runs.size()))
        << ',';
    if (!successes.empty()) out << fmt17(median_of(successes));
    out << "\n";
  }
}

}  // namespace qga::bench
