#pragma once

#include <cstdint>
#include <vector>

#include "bft/qubo.hpp"

namespace bft {

/// Assignment of -1/+1 values to the spins.
struct SpinState {
  std::vector<std::int8_t> spins;
};

/// Ising problem over spins s_i in {-1,+1} with energy
///   E(s) = -1/2 sum_{i,j} J_ij s_i s_j + sum_i h_i s_i + offset,
/// J symmetric with zero diagonal, stored as the unique i < j entries.
class IsingProblem {
 public:
  IsingProblem() = default;
  IsingProblem(int n, std::vector<PairTerm> couplings, std::vector<double> field,
               double offset);

  int n() const { return n_; }
  /// Unique upper-triangle couplings, sorted by (i, j).
  const std::vector<PairTerm>& couplings() const { return couplings_; }
  const std::vector<double>& field() const { return field_; }
  double offset() const { return offset_; }

 private:
  int n_ = 0;
  std::vector<PairTerm> couplings_;
  std::vector<double> field_;
  double offset_ = 0.0;
};

/// Evaluates E(s). Throws std::invalid_argument on length mismatch or
/// spins outside {-1,+1}.
double ising_energy(const IsingProblem& p, const SpinState& s);

/// Exact 0/1 -> spin reformulation under t_i = (1 + s_i) / 2:
/// ising_energy(convert(p), s) == qubo_energy(p, binary_from_spin(s)) for
/// every assignment. Keeps one J entry per QUBO pair.
IsingProblem qubo_to_ising(const QuboProblem& p);

/// t_i = (1 + s_i) / 2.
BinaryState binary_from_spin(const SpinState& s);

/// s_i = 2 t_i - 1 (inverse of binary_from_spin).
SpinState spin_from_binary(const BinaryState& t);

}  // namespace bft
