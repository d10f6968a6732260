#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qga/objective.hpp"
#include "qga/qsim.hpp"
#include "qga/rng.hpp"
#include "qga/telemetry.hpp"

namespace qga {

inline constexpr double kPi = 3.14159265358979323846;

// How the incumbent's chromosome is rebuilt each generation:
//  - Deterministic: X gates encode the incumbent bits exactly.
//  - Pure: Ry(prep_angles[g]) reproduces the stored per-qubit marginals.
//  - Reinforcement: Pure, then each qubit rotated by epsilon toward the
//    incumbent bit, total angle clamped to [0, pi].
enum class ElitismKind { Pure, Reinforcement, Deterministic };

struct ElitismMode {
  ElitismKind kind = ElitismKind::Reinforcement;
  double epsilon = kPi / 16.0;  // Reinforcement only; radians in (0, pi/2)

  static ElitismMode pure() { return {ElitismKind::Pure, 0.0}; }
  static ElitismMode reinforcement(double epsilon) {
    return {ElitismKind::Reinforcement, epsilon};
  }
  static ElitismMode deterministic() { return {ElitismKind::Deterministic, 0.0}; }
};

// Individual i's gene g lives on qubit i*genes + g.
struct ChromosomeLayout {
  int population = 0;  // N >= 2
  int genes = 0;       // n >= 1

  int qubit(int individual, int gene) const { return individual * genes + gene; }
  int total_qubits() const { return population * genes; }
};

struct HqgaConfig {
  int population = 3;
  double mutation_prob = 0.3;           // p_m, per free qubit
  double mutation_angle = kPi / 2.0;    // theta_m in (0, pi]
  double entangle_prob = 0.5;           // p_e, per gene of each non-best individual
  ElitismMode elitism = ElitismMode::reinforcement(kPi / 16.0);
  std::uint64_t max_evaluations = 512;
  std::uint64_t seed = 0;
};

// Incumbent best: classical bits, fitness, and the pre-measurement Ry
// angles (theta = 2*asin(sqrt(P(1))), each in [0, pi]) of the chromosome
// that produced it, refreshed every generation.
struct BestRecord {
  Portfolio bits;
  double value = 0.0;
  std::vector<double> prep_angles;
};

using EntangleMask = std::vector<std::vector<std::uint8_t>>;

// Puts every qubit into the uniform superposition.
void init_population(const ChromosomeLayout& layout, qsim::QuantumRegister& reg);

// One measurement shot sliced per individual, each slice evaluated through
// the counting evaluator (adds exactly N evaluations).
std::pair<std::vector<Portfolio>, std::vector<double>> measure_and_evaluate(
    qsim::QuantumRegister& reg, const ChromosomeLayout& layout,
    CountingEvaluator& evaluator, Rng& rng);

// Strict-improvement update: returns a record for the generation winner
// when it beats the incumbent, otherwise a copy of the incumbent.
BestRecord select_best(const std::vector<Portfolio>& bitstrings,
                       const std::vector<double>& fitnesses,
                       const std::optional<BestRecord>& incumbent);

// Rebuilds the incumbent's chromosome on a fresh register.
void apply_elitism(qsim::QuantumRegister& reg, const ChromosomeLayout& layout,
                   int best_slot, const BestRecord& best, const ElitismMode& mode);

// Per gene of each non-best individual: with probability p_e entangle it to
// the matching best-chromosome qubit via CX (target still |0>), so it
// copies the best qubit's collapsed bit on measurement; otherwise the gene
// is free and is re-prepared to that individual's previously measured bit.
// Returns the entangle mask (best row all zero).
EntangleMask entangled_crossover(qsim::QuantumRegister& reg,
                                 const ChromosomeLayout& layout, int best_slot,
                                 const std::vector<Portfolio>& previous_bits,
                                 double entangle_prob, Rng& rng);

// Rotates each free qubit of each non-best individual by +/-theta_m (sign
// uniform) with probability p_m. Entangled qubits and the best chromosome
// are untouched.
void ry_mutation(qsim::QuantumRegister& reg, const ChromosomeLayout& layout,
                 int best_slot, const EntangleMask& mask, double mutation_prob,
                 double mutation_angle, Rng& rng);

// Pre-measurement marginals of one chromosome as Ry angles in [0, pi].
std::vector<double> record_best_prep_angles(const qsim::QuantumRegister& reg,
                                            const ChromosomeLayout& layout,
                                            int best_slot);

RunResult run_hqga(const ProblemInstance& instance, const HqgaConfig& config);

}  // namespace qga
