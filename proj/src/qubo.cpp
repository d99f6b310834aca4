#include "bft/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bft {

namespace {

void check_state(const QuboProblem& p, const BinaryState& t) {
  if (static_cast<int>(t.bits.size()) != p.n())
    throw std::invalid_argument("binary state length " + std::to_string(t.bits.size()) +
                                " does not match problem size " + std::to_string(p.n()));
  for (auto b : t.bits)
    if (b != 0 && b != 1) throw std::invalid_argument("binary state entry outside {0,1}");
}

}  // namespace

QuboProblem::QuboProblem(int n, std::vector<double> bias, std::vector<PairTerm> pairs)
    : n_(n), bias_(std::move(bias)), pairs_(std::move(pairs)) {
  if (n_ < 0) throw std::invalid_argument("negative problem size");
  if (static_cast<int>(bias_.size()) != n_)
    throw std::invalid_argument("bias length " + std::to_string(bias_.size()) +
                                " does not match n = " + std::to_string(n_));
  for (double a : bias_)
    if (!std::isfinite(a)) throw std::invalid_argument("non-finite bias coefficient");
  for (auto& p : pairs_) {
    if (p.i == p.j) throw std::invalid_argument("self-pair (" + std::to_string(p.i) + ")");
    if (p.i > p.j) std::swap(p.i, p.j);
    if (p.i < 0 || p.j >= n_)
      throw std::invalid_argument("pair index (" + std::to_string(p.i) + "," +
                                  std::to_string(p.j) + ") out of range for n = " +
                                  std::to_string(n_));
    if (!std::isfinite(p.w)) throw std::invalid_argument("non-finite pair coefficient");
  }
  std::sort(pairs_.begin(), pairs_.end(), [](const PairTerm& a, const PairTerm& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  for (std::size_t k = 1; k < pairs_.size(); ++k)
    if (pairs_[k - 1].i == pairs_[k].i && pairs_[k - 1].j == pairs_[k].j)
      throw std::invalid_argument("duplicate pair (" + std::to_string(pairs_[k].i) + "," +
                                  std::to_string(pairs_[k].j) + ")");
}

double qubo_energy(const QuboProblem& p, const BinaryState& t) {
  check_state(p, t);
  double e = 0.0;
  for (int i = 0; i < p.n(); ++i)
    if (t.bits[i]) e += p.bias()[i];
  for (const auto& pt : p.pairs())
    if (t.bits[pt.i] && t.bits[pt.j]) e += pt.w;
  return e;
}

namespace {

// Direct evaluation for a pattern given as counter bits (bit n-1-i of v is t_i,
// so counting order equals lexicographic order on the bit pattern).
double eval_pattern(const QuboProblem& p, std::uint32_t v) {
  const int n = p.n();
  double e = 0.0;
  for (int i = 0; i < n; ++i)
    if (v >> (n - 1 - i) & 1u) e += p.bias()[i];
  for (const auto& pt : p.pairs())
    if ((v >> (n - 1 - pt.i) & 1u) && (v >> (n - 1 - pt.j) & 1u)) e += pt.w;
  return e;
}

}  // namespace

std::pair<BinaryState, double> brute_force_minimum(const QuboProblem& p) {
  const int n = p.n();
  if (n > 24)
    throw std::invalid_argument("brute_force_minimum limited to n <= 24, got n = " +
                                std::to_string(n));
  if (n == 0) return {BinaryState{}, 0.0};

  // Adjacency for incremental single-bit updates.
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& pt : p.pairs()) {
    adj[pt.i].push_back({pt.j, pt.w});
    adj[pt.j].push_back({pt.i, pt.w});
  }

  // Gray-code sweep tracking the energy incrementally; candidates close to
  // the running minimum are re-evaluated directly so ties compare exactly.
  std::vector<std::uint8_t> t(n, 0);
  double energy = 0.0;
  std::uint32_t best_pattern = 0;
  double best_energy = 0.0;  // pattern 0 has energy 0
  const std::uint64_t total = 1ull << n;
  std::uint32_t gray_prev = 0;
  for (std::uint64_t k = 1; k < total; ++k) {
    const std::uint32_t gray = static_cast<std::uint32_t>(k ^ (k >> 1));
    const std::uint32_t changed = gray ^ gray_prev;
    gray_prev = gray;
    int bit_pos = 0;
    while (!(changed >> bit_pos & 1u)) ++bit_pos;
    const int i = n - 1 - bit_pos;  // variable index for this counter bit
    double delta = p.bias()[i];
    for (auto [j, w] : adj[i])
      if (t[j]) delta += w;
    if (t[i]) {
      t[i] = 0;
      energy -= delta;
    } else {
      t[i] = 1;
      energy += delta;
    }
    if ((k & 0xfffu) == 0) energy = eval_pattern(p, gray);  // cap drift
    if (energy <= best_energy + 1e-9 * (1.0 + std::abs(best_energy))) {
      const double exact = eval_pattern(p, gray);
      if (exact < best_energy || (exact == best_energy && gray < best_pattern)) {
        best_energy = exact;
        best_pattern = gray;
      }
    }
  }

  BinaryState best;
  best.bits.resize(n);
  for (int i = 0; i < n; ++i) best.bits[i] = best_pattern >> (n - 1 - i) & 1u;
  return {std::move(best), best_energy};
}

}  // namespace bft
