#pragma once

#include <cstdint>
#include <vector>

#include "qga/market_data.hpp"

namespace qga {

// Asset selection vector; entries are exactly 0 or 1, one per ticker.
using Portfolio = std::vector<std::uint8_t>;

// mu'x - gamma * x'Sigma x, with the quadratic term summed over all ordered
// pairs (both off-diagonal terms counted, no 1/2).
double fitness(const ProblemInstance& instance, const Portfolio& x);

// Wraps one instance and counts every evaluation; one run owns exactly one.
class CountingEvaluator {
 public:
  explicit CountingEvaluator(ProblemInstance instance);

  double evaluate(const Portfolio& x);
  std::uint64_t count() const { return count_; }
  const ProblemInstance& instance() const { return instance_; }

 private:
  ProblemInstance instance_;
  std::uint64_t count_ = 0;
};

struct BruteForceResult {
  Portfolio best;
  double best_value = 0.0;
  std::uint64_t evaluations = 0;  // exactly 2^n
};

// Exhaustive maximization over {0,1}^n, n <= 24. Ties go to the portfolio
// whose bits, read as a big-endian integer (asset 0 most significant), are
// smallest.
BruteForceResult brute_force(const ProblemInstance& instance);

// Index of the max fitness; ties go to the lowest index.
int argmax_fitness(const std::vector<double>& fitnesses);

}  // namespace qga
