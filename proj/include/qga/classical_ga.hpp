#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qga/objective.hpp"
#include "qga/rng.hpp"
#include "qga/telemetry.hpp"

namespace qga {

struct GaConfig {
  int population = 10;                      // N >= 2
  double crossover_prob = 0.9;              // p_c
  std::optional<double> bit_flip_prob;      // per bit; defaults to 0.01
  int tournament_size = 3;                  // 1 <= k <= N
  int elite_count = 1;                      // 0 <= elites < N
  std::uint64_t max_evaluations = 512;
  std::uint64_t seed = 0;
};

// Swaps the suffixes of two equal-length parents at cut, 1 <= cut <= n-1
// (cut counts genes kept from the first parent).
std::pair<Portfolio, Portfolio> one_point_crossover(const Portfolio& a,
                                                    const Portfolio& b,
                                                    std::size_t cut);

// Flips each bit independently with probability p.
Portfolio bit_flip_mutation(const Portfolio& x, double p, Rng& rng);

// Samples k distinct population indices uniformly and returns the index of
// the max-fitness contestant; ties go to the lowest index.
std::size_t tournament_select(const std::vector<double>& fitnesses, int k,
                              Rng& rng);

// Generational GA: elites carried over with cached fitness (not
// re-evaluated), offspring bred by tournament selection, one-point
// crossover, and per-bit mutation. Generation 0 costs N evaluations, every
// later generation N - elite_count.
RunResult run_ga(const ProblemInstance& instance, const GaConfig& config);

}  // namespace qga
