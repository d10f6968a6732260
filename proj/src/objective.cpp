#include "qga/objective.hpp"

#include <stdexcept>
#include <utility>

namespace qga {

double fitness(const ProblemInstance& instance, const Portfolio& x) {
  const std::size_t n = instance.dimension();
  if (x.size() != n) throw std::invalid_argument("portfolio dimension mismatch");
  for (std::uint8_t b : x) {
    if (b > 1) throw std::invalid_argument("portfolio entries must be 0 or 1");
  }
  double linear = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i]) linear += instance.mu[i];
  }
  double quadratic = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!x[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j]) quadratic += instance.sigma[i][j];
    }
  }
  return linear - instance.gamma * quadratic;
}

CountingEvaluator::CountingEvaluator(ProblemInstance instance)
    : instance_(std::move(instance)) {
  validate_instance(instance_);
}

double CountingEvaluator::evaluate(const Portfolio& x) {
  ++count_;
  return fitness(instance_, x);
}

int argmax_fitness(const std::vector<double>& fitnesses) {
  if (fitnesses.empty()) throw std::invalid_argument("empty fitness vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(fitnesses.size()); ++i) {
    if (fitnesses[i] > fitnesses[best]) best = i;
  }
  return best;
}

BruteForceResult brute_force(const ProblemInstance& instance) {
  const std::size_t n = instance.dimension();
  if (n > 24) throw std::invalid_argument("brute force limited to 24 assets");

  BruteForceResult result;
  Portfolio x(n, 0);
  const std::uint64_t total = std::uint64_t{1} << n;
  bool have_best = false;
  // Ascending counter with asset 0 in the most significant position, so the
  // first maximizer found is also the big-endian tie winner.
  for (std::uint64_t code = 0; code < total; ++code) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<std::uint8_t>((code >> (n - 1 - i)) & 1u);
    }
    const double value = fitness(instance, x);
    ++result.evaluations;
    if (!have_best || value > result.best_value) {
      have_best = true;
      result.best = x;
      result.best_value = value;
    }
  }
  return result;
}

}  // namespace qga
