#include "qga/hqga.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qga {

namespace {

void check_layout(const ChromosomeLayout& layout) {
  if (layout.population < 2) throw std::invalid_argument("population must be >= 2");
  if (layout.genes < 1) throw std::invalid_argument("genes must be >= 1");
}

void check_slot(const ChromosomeLayout& layout, int slot) {
  if (slot < 0 || slot >= layout.population) {
    throw std::invalid_argument("chromosome index out of range");
  }
}

double clamp_angle(double theta) {
  return std::min(kPi, std::max(0.0, theta));
}

GenerationRecord make_record(int generation, std::uint64_t evaluations,
                             std::vector<double> fitnesses,
                             std::vector<Portfolio> bitstrings,
                             double best_so_far, int elite_slot) {
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
  rec.elite_slot = elite_slot;
  return rec;
}

}  // namespace

void init_population(const ChromosomeLayout& layout, qsim::QuantumRegister& reg) {
  check_layout(layout);
  if (reg.num_qubits() != layout.total_qubits()) {
    throw std::invalid_argument("register size does not match layout");
  }
  for (int q = 0; q < layout.total_qubits(); ++q) reg.apply_h(q);
}

std::pair<std::vector<Portfolio>, std::vector<double>> measure_and_evaluate(
    qsim::QuantumRegister& reg, const ChromosomeLayout& layout,
    CountingEvaluator& evaluator, Rng& rng) {
  check_layout(layout);
  const std::vector<std::uint8_t> bits = reg.measure_all(rng);
  std::vector<Portfolio> slices(layout.population);
  std::vector<double> fits(layout.population);
  for (int i = 0; i < layout.population; ++i) {
    slices[i].assign(bits.begin() + layout.qubit(i, 0),
                     bits.begin() + layout.qubit(i, 0) + layout.genes);
    fits[i] = evaluator.evaluate(slices[i]);
  }
  return {std::move(slices), std::move(fits)};
}

BestRecord select_best(const std::vector<Portfolio>& bitstrings,
                       const std::vector<double>& fitnesses,
                       const std::optional<BestRecord>& incumbent) {
  if (bitstrings.size() != fitnesses.size()) {
    throw std::invalid_argument("bitstrings and fitnesses disagree");
  }
  const int winner = argmax_fitness(fitnesses);
  if (!incumbent || fitnesses[winner] > incumbent->value) {
    return BestRecord{bitstrings[winner], fitnesses[winner], {}};
  }
  return *incumbent;
}

void apply_elitism(qsim::QuantumRegister& reg, const ChromosomeLayout& layout,
                   int best_slot, const BestRecord& best, const ElitismMode& mode) {
  check_layout(layout);
  check_slot(layout, best_slot);
  if (best.bits.size() != static_cast<std::size_t>(layout.genes)) {
    throw std::invalid_argument("best record has wrong gene count");
  }
  if (mode.kind != ElitismKind::Deterministic &&
      best.prep_angles.size() != static_cast<std::size_t>(layout.genes)) {
    throw std::invalid_argument("best record is missing preparation angles");
  }
  if (mode.kind == ElitismKind::Reinforcement &&
      !(mode.epsilon > 0.0 && mode.epsilon < kPi / 2.0)) {
    throw std::invalid_argument("reinforcement epsilon must lie in (0, pi/2)");
  }

  for (int g = 0; g < layout.genes; ++g) {
    const int q = layout.qubit(best_slot, g);
    switch (mode.kind) {
      case ElitismKind::Deterministic:
        if (best.bits[g]) reg.apply_x(q);
        break;
      case ElitismKind::Pure:
        reg.apply_ry(q, best.prep_angles[g]);
        break;
      case ElitismKind::Reinforcement: {
        const double step = best.bits[g] ? mode.epsilon : -mode.epsilon;
        reg.apply_ry(q, clamp_angle(best.prep_angles[g] + step));
        break;
      }
    }
  }
}

EntangleMask entangled_crossover(qsim::QuantumRegister& reg,
                                 const ChromosomeLayout& layout, int best_slot,
                                 const std::vector<Portfolio>& previous_bits,
                                 double entangle_prob, Rng& rng) {
  check_layout(layout);
  check_slot(layout, best_slot);
  if (previous_bits.size() != static_cast<std::size_t>(layout.population)) {
    throw std::invalid_argument("previous_bits must cover every individual");
  }
  EntangleMask mask(layout.population,
                    std::vector<std::uint8_t>(layout.genes, 0));
  for (int i = 0; i < layout.population; ++i) {
    if (i == best_slot) continue;
    if (previous_bits[i].size() != static_cast<std::size_t>(layout.genes)) {
      throw std::invalid_argument("previous bitstring has wrong gene count");
    }
    for (int g = 0; g < layout.genes; ++g) {
      const int q = layout.qubit(i, g);
      if (rng.bernoulli(entangle_prob)) {
        mask[i][g] = 1;
        reg.apply_cx(layout.qubit(best_slot, g), q);
      } else if (previous_bits[i][g]) {
        reg.apply_x(q);
      }
    }
  }
  return mask;
}

void ry_mutation(qsim::QuantumRegister& reg, const ChromosomeLayout& layout,
                 int best_slot, const EntangleMask& mask, double mutation_prob,
                 double mutation_angle, Rng& rng) {
  check_layout(layout);
  check_slot(layout, best_slot);
  if (!(mutation_angle > 0.0 && mutation_angle <= kPi)) {
    throw std::invalid_argument("mutation angle must lie in (0, pi]");
  }
  if (mask.size() != static_cast<std::size_t>(layout.population)) {
    throw std::invalid_argument("mask must cover every individual");
  }
  for (int i = 0; i < layout.population; ++i) {
    if (i == best_slot) continue;
    for (int g = 0; g < layout.genes; ++g) {
      if (mask[i][g]) continue;
      if (rng.bernoulli(mutation_prob)) {
        const double sign = rng.uniform_below(2) ? 1.0 : -1.0;
        reg.apply_ry(layout.qubit(i, g), sign * mutation_angle);
      }
    }
  }
}

std::vector<double> record_best_prep_angles(const qsim::QuantumRegister& reg,
                                            const ChromosomeLayout& layout,
                                            int best_slot) {
  check_layout(layout);
  check_slot(layout, best_slot);
  std::vector<double> angles(layout.genes);
  for (int g = 0; g < layout.genes; ++g) {
    double p1 = reg.probability_of(layout.qubit(best_slot, g), 1);
    p1 = std::min(1.0, std::max(0.0, p1));
    angles[g] = 2.0 * std::asin(std::sqrt(p1));
  }
  return angles;
}

RunResult run_hqga(const ProblemInstance& instance, const HqgaConfig& config) {
  const int n = static_cast<int>(instance.dimension());
  const ChromosomeLayout layout{config.population, n};
  check_layout(layout);
  if (!(config.mutation_prob >= 0.0 && config.mutation_prob <= 1.0)) {
    throw std::invalid_argument("mutation probability must lie in [0, 1]");
  }
  if (!(config.entangle_prob >= 0.0 && config.entangle_prob <= 1.0)) {
    throw std::invalid_argument("entangle probability must lie in [0, 1]");
  }
  if (!(config.mutation_angle > 0.0 && config.mutation_angle <= kPi)) {
    throw std::invalid_argument("mutation angle must lie in (0, pi]");
  }
  if (config.elitism.kind == ElitismKind::Reinforcement &&
      !(config.elitism.epsilon > 0.0 && config.elitism.epsilon < kPi / 2.0)) {
    throw std::invalid_argument("reinforcement epsilon must lie in (0, pi/2)");
  }
  const std::uint64_t population = static_cast<std::uint64_t>(config.population);
  if (config.max_evaluations < population) {
    throw std::invalid_argument("evaluation budget below one generation");
  }

  CountingEvaluator evaluator(instance);
  Rng rng(config.seed);

  RunResult result;
  result.algorithm = "hqga";
  result.instance_label = instance.label;
  result.population = config.population;
  result.seed = config.seed;

  std::optional<BestRecord> incumbent;
  int best_slot = -1;
  std::vector<Portfolio> previous_bits;

  int generation = 0;
  while (evaluator.count() + population <= config.max_evaluations) {
    qsim::QuantumRegister reg(layout.total_qubits());
    int circuit_elite_slot = -1;
    if (generation == 0) {
      init_population(layout, reg);
    } else {
      apply_elitism(reg, layout, best_slot, *incumbent, config.elitism);
      const EntangleMask mask =
          entangled_crossover(reg, layout, best_slot, previous_bits,
                              config.entangle_prob, rng);
      ry_mutation(reg, layout, best_slot, mask, config.mutation_prob,
                  config.mutation_angle, rng);
      circuit_elite_slot = best_slot;
    }

    // Marginals collapse at measurement, so snapshot every chromosome's
    // preparation angles first; the winner's are kept.
    std::vector<std::vector<double>> angles(layout.population);
    for (int i = 0; i < layout.population; ++i) {
      angles[i] = record_best_prep_angles(reg, layout, i);
    }

    auto [bits, fits] = measure_and_evaluate(reg, layout, evaluator, rng);
    const int winner = argmax_fitness(fits);
    if (!incumbent || fits[winner] > incumbent->value) {
      incumbent = BestRecord{bits[winner], fits[winner], angles[winner]};
      best_slot = winner;
    } else {
      incumbent->prep_angles = angles[best_slot];
    }
    previous_bits = bits;

    result.generations.push_back(make_record(generation, evaluator.count(),
                                             std::move(fits), std::move(bits),
                                             incumbent->value,
                                             circuit_elite_slot));
    ++generation;
  }

  result.best_bits = incumbent->bits;
  result.best_value = incumbent->value;
  result.best_prep_angles = incumbent->prep_angles;
  return result;
}

}  // namespace qga
