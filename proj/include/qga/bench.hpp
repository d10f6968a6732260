#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qga/classical_ga.hpp"
#include "qga/hqga.hpp"
#include "qga/telemetry.hpp"

namespace qga::bench {

// Srinivas/Patnaik spread of one generation: f_max - f_mean, always >= 0.
double diversity(const GenerationRecord& record);

// Smallest cumulative evaluation count whose best-so-far is within 1e-12 of
// f_star; empty when the run never reaches it.
std::optional<std::uint64_t> evals_to_optimum(const RunResult& run, double f_star);

enum class Statistic { Best, Mean, Worst, Diversity };

// Per-point mean and population standard deviation across runs sharing one
// strictly increasing evaluation grid.
struct AggregatedSeries {
  std::vector<std::uint64_t> evaluations;
  std::vector<double> mean;
  std::vector<double> stddev;
};

// One run's curve on its evaluation grid.
struct Series {
  std::vector<std::uint64_t> evaluations;
  std::vector<double> values;
};

Series extract_series(const RunResult& run, Statistic stat);
AggregatedSeries aggregate_series(const std::vector<Series>& series);
AggregatedSeries aggregate(const std::vector<RunResult>& runs, Statistic stat);

// Trapezoidal area under (evaluations, values).
double trapezoid_area(const Series& series);

// ---- CSV formats -----------------------------------------------------------
// Run CSV columns:
//   algorithm,instance,pop,seed,generation,evaluations,best,mean,worst,
//   diversity,best_so_far
// Doubles are rendered with 17 significant digits.

struct RunCsvRow {
  int generation = 0;
  std::uint64_t evaluations = 0;
  double best = 0.0;
  double mean = 0.0;
  double worst = 0.0;
  double diversity = 0.0;
  double best_so_far = 0.0;
};

struct RunCsv {
  std::string algorithm;
  std::string instance;
  int pop = 0;
  std::uint64_t seed = 0;
  std::vector<RunCsvRow> rows;
};

void write_run_csv(const RunResult& run, const std::string& path);
RunCsv read_run_csv(const std::string& path);

// Brute CSV columns: instance,n,best_bits,best_value,evaluations
struct BruteRow {
  std::string instance;
  int n = 0;
  std::string best_bits;  // asset 0 first
  double best_value = 0.0;
  std::uint64_t evaluations = 0;
};

std::vector<BruteRow> read_brute_csv(const std::string& path);

// ---- experiment configuration ----------------------------------------------

struct AlgorithmSpec {
  std::string name;  // "hqga" or "ga"
  std::vector<int> populations;
  // hqga
  double p_m = 0.3;
  double theta_m = kPi / 2.0;
  double p_e = 0.5;
  std::string elitism = "reinforcement";  // "pure" | "reinforcement" | "deterministic"
  double epsilon = kPi / 16.0;
  // ga
  double p_c = 0.9;
  std::optional<double> p_m_bit;  // defaults to 0.01
  int tournament_size = 3;
  int elite_count = 1;
};

struct SampleSpec {
  std::string prices;
  std::size_t k = 9;
  double gamma = 1.0;
  std::vector<std::uint64_t> subset_seeds;
};

struct ExperimentConfig {
  std::vector<std::string> instances;   // instance JSON paths
  std::optional<SampleSpec> sample;     // alternative to explicit paths
  int repetitions = 1;                  // R >= 1
  std::uint64_t budget = 512;
  std::uint64_t base_seed = 0;
  std::vector<AlgorithmSpec> algorithms;
};

// Paths inside the config resolve relative to the config file's directory.
ExperimentConfig load_experiment_config(const std::string& path);

// ---- subcommand drivers ------------------------------------------------------

struct PrepareOptions {
  std::string prices_csv;
  std::size_t k = 9;
  double gamma = 1.0;
  std::vector<std::uint64_t> subset_seeds;
  std::string out_dir;
};

struct PrepareResult {
  std::vector<std::string> instance_paths;
  std::size_t dropped_rows = 0;  // incomplete price rows removed during load
};

// Writes one instance JSON per subset seed.
PrepareResult run_prepare(const PrepareOptions& options);

struct BruteOptions {
  std::string instances_dir;
  std::string out_csv;
};

void run_brute(const BruteOptions& options);

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Executes every (instance, algorithm, population, repetition) cell, one run
// CSV per cell. Per-cell seeds derive from the base seed and the cell
// coordinates, so output bytes do not depend on thread count.
void run_experiments(const RunOptions& options);

struct ReportOptions {
  std::string runs_dir;
  std::string brute_csv;
  std::string out_dir;
};

// Aggregates run CSVs into best/mean/worst/diversity tables (population
// standard deviation across repetitions) plus an evaluations-to-optimum
// summary against the brute-force table.
void run_report(const ReportOptions& options);

}  // namespace qga::bench
