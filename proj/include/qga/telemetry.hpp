#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qga/objective.hpp"

namespace qga {

// Snapshot of one generation; shared by both optimizers.
struct GenerationRecord {
  int generation = 0;                  // 0-based
  std::uint64_t evaluations = 0;       // cumulative count after this generation
  std::vector<double> fitnesses;       // one per individual
  std::vector<Portfolio> bitstrings;   // one per individual
  double best = 0.0;                   // max of fitnesses
  double mean = 0.0;
  double worst = 0.0;                  // min of fitnesses
  double best_so_far = 0.0;            // incumbent value after this generation
  // Slot rebuilt from the incumbent when this generation's circuit was
  // built; -1 for generation 0 and for the classical optimizer.
  int elite_slot = -1;
};

struct RunResult {
  std::string algorithm;
  std::string instance_label;
  int population = 0;
  std::uint64_t seed = 0;
  std::vector<GenerationRecord> generations;
  Portfolio best_bits;
  double best_value = 0.0;
  std::vector<double> best_prep_angles;  // quantum runs only
};

}  // namespace qga
