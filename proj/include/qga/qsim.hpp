#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qga/rng.hpp"

namespace qga::qsim {

using Amplitude = std::complex<double>;

// A maximal set of qubits whose joint state is stored as one amplitude
// vector of length 2^|qubit_ids|. Position k in qubit_ids maps to bit k of
// the amplitude index.
struct Cluster {
  std::vector<int> qubit_ids;
  std::vector<Amplitude> amplitudes;
};

struct Gate {
  enum class Kind { H, X, Ry, Cx };
  Kind kind;
  int q0;        // target for 1-qubit gates, control for Cx
  int q1 = -1;   // Cx target
  double theta = 0.0;  // Ry only, finite
};

Gate h(int q);
Gate x(int q);
Gate ry(int q, double theta);
Gate cx(int control, int target);

// Statevector register factored into independent clusters. Qubits only join
// a cluster through CX; single-qubit gates never grow a cluster.
class QuantumRegister {
 public:
  explicit QuantumRegister(int num_qubits);

  int num_qubits() const { return num_qubits_; }

  void apply_h(int q);
  void apply_x(int q);
  void apply_ry(int q, double theta);
  void apply_cx(int control, int target);
  void apply(const Gate& gate);

  // Marginal probability of measuring `outcome` (0 or 1) on qubit q.
  double probability_of(int q, int outcome) const;

  // One shot: samples a basis state per cluster, collapses the whole
  // register to classical singleton clusters, and returns the bits indexed
  // by global qubit id. Clusters are consumed in order of smallest qubit id
  // so the rng stream is independent of merge history.
  std::vector<std::uint8_t> measure_all(Rng& rng);

  // Snapshot of the factored state, clusters ordered by smallest qubit id.
  std::vector<Cluster> dump() const;

  std::size_t largest_cluster_size() const;

 private:
  void apply_1q(int q, const Amplitude u00, const Amplitude u01,
                const Amplitude u10, const Amplitude u11);
  void check_qubit(int q) const;
  // Merges the clusters holding the two qubits (tensor product); afterwards
  // both live in one cluster. No-op when already joint.
  void merge_holding(int a, int b);

  int num_qubits_ = 0;
  std::vector<Cluster> clusters_;
  std::vector<std::size_t> cluster_of_;  // qubit id -> index into clusters_
};

}  // namespace qga::qsim
