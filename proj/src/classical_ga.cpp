#include "qga/classical_ga.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qga {

namespace {

GenerationRecord make_record(int generation, std::uint64_t evaluations,
                             std::vector<double> fitnesses,
                             std::vector<Portfolio> bitstrings,
                             double best_so_far) {
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
  // the true mean lies in [worst, best]; summation rounding may not
  rec.mean = std::min(rec.best,
                      std::max(rec.worst, sum / static_cast<double>(fitnesses.size())));
  rec.fitnesses = std::move(fitnesses);
  rec.bitstrings = std::move(bitstrings);
  rec.best_so_far = best_so_far;
  rec.elite_slot = -1;
  return rec;
}

}  // namespace

std::pair<Portfolio, Portfolio> one_point_crossover(const Portfolio& a,
                                                    const Portfolio& b,
                                                    std::size_t cut) {
  if (a.size() != b.size()) throw std::invalid_argument("parents differ in length");
  if (a.size() < 2) throw std::invalid_argument("crossover needs >= 2 genes");
  if (cut < 1 || cut > a.size() - 1) throw std::invalid_argument("cut out of range");
  Portfolio c1 = a;
  Portfolio c2 = b;
  for (std::size_t i = cut; i < a.size(); ++i) std::swap(c1[i], c2[i]);
  return {std::move(c1), std::move(c2)};
}

Portfolio bit_flip_mutation(const Portfolio& x, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("flip probability must lie in [0, 1]");
  Portfolio y = x;
  for (auto& bit : y) {
    if (rng.bernoulli(p)) bit = static_cast<std::uint8_t>(1 - bit);
  }
  return y;
}

std::size_t tournament_select(const std::vector<double>& fitnesses, int k,
                              Rng& rng) {
  const std::size_t n = fitnesses.size();
  if (n == 0) throw std::invalid_argument("empty population");
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("tournament size out of range");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::size_t winner = n;
  for (int i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(idx[i], idx[j]);
    const std::size_t contestant = idx[i];
    if (winner == n || fitnesses[contestant] > fitnesses[winner] ||
        (fitnesses[contestant] == fitnesses[winner] && contestant < winner)) {
      winner = contestant;
    }
  }
  return winner;
}

RunResult run_ga(const ProblemInstance& instance, const GaConfig& config) {
  const std::size_t n = instance.dimension();
  const int population = config.population;
  if (population < 2) throw std::invalid_argument("population must be >= 2");
  if (!(config.crossover_prob >= 0.0 && config.crossover_prob <= 1.0)) {
    throw std::invalid_argument("crossover probability must lie in [0, 1]");
  }
  const double flip_prob = config.bit_flip_prob.value_or(0.01);
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw std::invalid_argument("flip probability must lie in [0, 1]");
  }
  if (config.tournament_size < 1 || config.tournament_size > population) {
    throw std::invalid_argument("tournament size out of range");
  }
  if (config.elite_count < 0 || config.elite_count >= population) {
    throw std::invalid_argument("elite count must lie in [0, population)");
  }
  const std::uint64_t pop64 = static_cast<std::uint64_t>(population);
  if (config.max_evaluations < pop64) {
    throw std::invalid_argument("evaluation budget below one generation");
  }

  CountingEvaluator evaluator(instance);
  Rng rng(config.seed);

  RunResult result;
  result.algorithm = "ga";
  result.instance_label = instance.label;
  result.population = population;
  result.seed = config.seed;

  std::vector<Portfolio> pop(population);
  std::vector<double> fits(population);
  for (int i = 0; i < population; ++i) {
    Portfolio x(n);
    for (auto& bit : x) bit = static_cast<std::uint8_t>(rng.uniform_below(2));
    pop[i] = std::move(x);
  }
  for (int i = 0; i < population; ++i) fits[i] = evaluator.evaluate(pop[i]);

  double best_so_far = fits[argmax_fitness(fits)];
  result.best_bits = pop[argmax_fitness(fits)];
  result.best_value = best_so_far;

  int generation = 0;
  result.generations.push_back(
      make_record(generation, evaluator.count(), fits, pop, best_so_far));

  const std::uint64_t per_generation =
      pop64 - static_cast<std::uint64_t>(config.elite_count);
  while (evaluator.count() + per_generation <= config.max_evaluations) {
    std::vector<std::size_t> order(population);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&fits](std::size_t a, std::size_t b) {
      if (fits[a] != fits[b]) return fits[a] > fits[b];
      return a < b;
    });

    std::vector<Portfolio> next_pop;
    std::vector<double> next_fits;
    next_pop.reserve(population);
    next_fits.reserve(population);
    for (int e = 0; e < config.elite_count; ++e) {
      next_pop.push_back(pop[order[e]]);
      next_fits.push_back(fits[order[e]]);  // cached, not re-evaluated
    }

    while (static_cast<int>(next_pop.size()) < population) {
      const std::size_t p1 = tournament_select(fits, config.tournament_size, rng);
      const std::size_t p2 = tournament_select(fits, config.tournament_size, rng);
      Portfolio c1 = pop[p1];
      Portfolio c2 = pop[p2];
      if (n >= 2 && rng.bernoulli(config.crossover_prob)) {
        const std::size_t cut = 1 + rng.uniform_below(n - 1);
        std::tie(c1, c2) = one_point_crossover(c1, c2, cut);
      }
      c1 = bit_flip_mutation(c1, flip_prob, rng);
      next_pop.push_back(std::move(c1));
      next_fits.push_back(0.0);
      if (static_cast<int>(next_pop.size()) < population) {
        c2 = bit_flip_mutation(c2, flip_prob, rng);
        next_pop.push_back(std::move(c2));
        next_fits.push_back(0.0);
      }
    }

    for (int i = config.elite_count; i < population; ++i) {
      next_fits[i] = evaluator.evaluate(next_pop[i]);
    }
    pop = std::move(next_pop);
    fits = std::move(next_fits);

    const int winner = argmax_fitness(fits);
    if (fits[winner] > best_so_far) {
      best_so_far = fits[winner];
      result.best_bits = pop[winner];
      result.best_value = best_so_far;
    }

    ++generation;
    result.generations.push_back(
        make_record(generation, evaluator.count(), fits, pop, best_so_far));
  }

  return result;
}

}  // namespace qga
