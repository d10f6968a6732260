#include "qga/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qga::qsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

int position_of(const Cluster& c, int q) {
  for (std::size_t k = 0; k < c.qubit_ids.size(); ++k) {
    if (c.qubit_ids[k] == q) return static_cast<int>(k);
  }
  throw std::logic_error("qubit not in cluster");
}

int min_id(const Cluster& c) {
  return *std::min_element(c.qubit_ids.begin(), c.qubit_ids.end());
}

}  // namespace

Gate h(int q) { return Gate{Gate::Kind::H, q, -1, 0.0}; }
Gate x(int q) { return Gate{Gate::Kind::X, q, -1, 0.0}; }

Gate ry(int q, double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("Ry angle must be finite");
  return Gate{Gate::Kind::Ry, q, -1, theta};
}

Gate cx(int control, int target) {
  if (control == target) throw std::invalid_argument("CX control equals target");
  return Gate{Gate::Kind::Cx, control, target, 0.0};
}

QuantumRegister::QuantumRegister(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits <= 0) throw std::invalid_argument("register needs at least one qubit");
  clusters_.reserve(num_qubits);
  cluster_of_.resize(num_qubits);
  for (int q = 0; q < num_qubits; ++q) {
    clusters_.push_back(Cluster{{q}, {Amplitude{1.0, 0.0}, Amplitude{0.0, 0.0}}});
    cluster_of_[q] = static_cast<std::size_t>(q);
  }
}

void QuantumRegister::check_qubit(int q) const {
  if (q < 0 || q >= num_qubits_) {
    throw std::out_of_range("qubit id " + std::to_string(q) + " out of range");
  }
}

void QuantumRegister::apply_1q(int q, const Amplitude u00, const Amplitude u01,
                               const Amplitude u10, const Amplitude u11) {
  check_qubit(q);
  Cluster& c = clusters_[cluster_of_[q]];
  const std::size_t step = std::size_t{1} << position_of(c, q);
  for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
    if (i & step) continue;
    const Amplitude a0 = c.amplitudes[i];
    const Amplitude a1 = c.amplitudes[i | step];
    c.amplitudes[i] = u00 * a0 + u01 * a1;
    c.amplitudes[i | step] = u10 * a0 + u11 * a1;
  }
}

void QuantumRegister::apply_h(int q) {
  apply_1q(q, kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2);
}

void QuantumRegister::apply_x(int q) {
  apply_1q(q, 0.0, 1.0, 1.0, 0.0);
}

void QuantumRegister::apply_ry(int q, double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("Ry angle must be finite");
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  apply_1q(q, c, -s, s, c);
}

void QuantumRegister::merge_holding(int a, int b) {
  const std::size_t ia = cluster_of_[a];
  const std::size_t ib = cluster_of_[b];
  if (ia == ib) return;
  const Cluster& ca = clusters_[ia];
  const Cluster& cb = clusters_[ib];
  Cluster merged;
  merged.qubit_ids = ca.qubit_ids;
  merged.qubit_ids.insert(merged.qubit_ids.end(), cb.qubit_ids.begin(), cb.qubit_ids.end());
  const std::size_t na = ca.qubit_ids.size();
  merged.amplitudes.resize(std::size_t{1} << merged.qubit_ids.size());
  for (std::size_t jb = 0; jb < cb.amplitudes.size(); ++jb) {
    for (std::size_t ja = 0; ja < ca.amplitudes.size(); ++ja) {
      merged.amplitudes[(jb << na) | ja] = ca.amplitudes[ja] * cb.amplitudes[jb];
    }
  }
  clusters_[ia] = std::move(merged);
  clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(ib));
  for (std::size_t ci = 0; ci < clusters_.size(); ++ci) {
    for (int q : clusters_[ci].qubit_ids) cluster_of_[q] = ci;
  }
}

void QuantumRegister::apply_cx(int control, int target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) throw std::invalid_argument("CX control equals target");
  merge_holding(control, target);
  Cluster& c = clusters_[cluster_of_[control]];
  const std::size_t cstep = std::size_t{1} << position_of(c, control);
  const std::size_t tstep = std::size_t{1} << position_of(c, target);
  for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
    if ((i & cstep) && !(i & tstep)) {
      std::swap(c.amplitudes[i], c.amplitudes[i | tstep]);
    }
  }
}

void QuantumRegister::apply(const Gate& gate) {
  switch (gate.kind) {
    case Gate::Kind::H: apply_h(gate.q0); break;
    case Gate::Kind::X: apply_x(gate.q0); break;
    case Gate::Kind::Ry: apply_ry(gate.q0, gate.theta); break;
    case Gate::Kind::Cx: apply_cx(gate.q0, gate.q1); break;
  }
}

double QuantumRegister::probability_of(int q, int outcome) const {
  check_qubit(q);
  if (outcome != 0 && outcome != 1) throw std::invalid_argument("outcome must be 0 or 1");
  const Cluster& c = clusters_[cluster_of_[q]];
  const std::size_t step = std::size_t{1} << position_of(c, q);
  double p = 0.0;
  for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
    if (((i & step) != 0) == (outcome == 1)) p += std::norm(c.amplitudes[i]);
  }
  return p;
}

std::vector<std::uint8_t> QuantumRegister::measure_all(Rng& rng) {
  std::vector<std::size_t> order(clusters_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return min_id(clusters_[a]) < min_id(clusters_[b]);
  });

  std::vector<std::uint8_t> bits(num_qubits_, 0);
  for (std::size_t ci : order) {
    const Cluster& c = clusters_[ci];
    const double u = rng.uniform_double();
    double cum = 0.0;
    std::size_t picked = c.amplitudes.size() - 1;
    for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
      cum += std::norm(c.amplitudes[i]);
      if (u < cum) {
        picked = i;
        break;
      }
    }
    for (std::size_t k = 0; k < c.qubit_ids.size(); ++k) {
      bits[c.qubit_ids[k]] = static_cast<std::uint8_t>((picked >> k) & 1u);
    }
  }

  clusters_.clear();
  clusters_.reserve(num_qubits_);
  for (int q = 0; q < num_qubits_; ++q) {
    Cluster s{{q}, {Amplitude{0.0, 0.0}, Amplitude{0.0, 0.0}}};
    s.amplitudes[bits[q]] = Amplitude{1.0, 0.0};
    clusters_.push_back(std::move(s));
    cluster_of_[q] = static_cast<std::size_t>(q);
  }
  return bits;
}

std::vector<Cluster> QuantumRegister::dump() const {
  std::vector<Cluster> out = clusters_;
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    return min_id(a) < min_id(b);
  });
  return out;
}

std::size_t QuantumRegister::largest_cluster_size() const {
  std::size_t m = 0;
  for (const Cluster& c : clusters_) m = std::max(m, c.qubit_ids.size());
  return m;
}

}  // namespace qga::qsim
