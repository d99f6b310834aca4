#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bft {

/// One off-diagonal quadratic coefficient, stored with i < j.
struct PairTerm {
  int i = 0;
  int j = 0;
  double w = 0.0;
};

/// Assignment of 0/1 values to the binary variables.
struct BinaryState {
  std::vector<std::uint8_t> bits;
};

/// Quadratic unconstrained binary optimization problem
///   O(t) = sum_i bias_i t_i + sum_{i<j} w_ij t_i t_j,  t_i in {0,1}.
///
/// Immutable after construction; pairs are canonicalized to i < j and kept
/// sorted by (i, j). Duplicate pairs, self-pairs, out-of-range indices and
/// non-finite coefficients are rejected.
class QuboProblem {
 public:
  QuboProblem() = default;
  QuboProblem(int n, std::vector<double> bias, std::vector<PairTerm> pairs);

  int n() const { return n_; }
  const std::vector<double>& bias() const { return bias_; }
  const std::vector<PairTerm>& pairs() const { return pairs_; }

 private:
  int n_ = 0;
  std::vector<double> bias_;
  std::vector<PairTerm> pairs_;
};

/// Evaluates O(t). Throws std::invalid_argument on length mismatch or
/// bits outside {0,1}.
double qubo_energy(const QuboProblem& p, const BinaryState& t);

/// Exhaustive ground-state search. Returns a minimizing assignment and its
/// energy; exact ties are broken toward the lexicographically lowest bit
/// pattern (t_0 compared first). Guarded to n <= 24.
std::pair<BinaryState, double> brute_force_minimum(const QuboProblem& p);

}  // namespace bft
