#include "bft/ising.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bft {

IsingProblem::IsingProblem(int n, std::vector<PairTerm> couplings, std::vector<double> field,
                           double offset)
    : n_(n), couplings_(std::move(couplings)), field_(std::move(field)), offset_(offset) {
  if (n_ < 0) throw std::invalid_argument("negative problem size");
  if (static_cast<int>(field_.size()) != n_)
    throw std::invalid_argument("field length " + std::to_string(field_.size()) +
                                " does not match n = " + std::to_string(n_));
  for (double h : field_)
    if (!std::isfinite(h)) throw std::invalid_argument("non-finite field coefficient");
  if (!std::isfinite(offset_)) throw std::invalid_argument("non-finite offset");
  for (auto& c : couplings_) {
    if (c.i == c.j) throw std::invalid_argument("self-coupling (" + std::to_string(c.i) + ")");
    if (c.i > c.j) std::swap(c.i, c.j);
    if (c.i < 0 || c.j >= n_)
      throw std::invalid_argument("coupling index (" + std::to_string(c.i) + "," +
                                  std::to_string(c.j) + ") out of range for n = " +
                                  std::to_string(n_));
    if (!std::isfinite(c.w)) throw std::invalid_argument("non-finite coupling coefficient");
  }
  std::sort(couplings_.begin(), couplings_.end(), [](const PairTerm& a, const PairTerm& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  for (std::size_t k = 1; k < couplings_.size(); ++k)
    if (couplings_[k - 1].i == couplings_[k].i && couplings_[k - 1].j == couplings_[k].j)
      throw std::invalid_argument("duplicate coupling (" + std::to_string(couplings_[k].i) +
                                  "," + std::to_string(couplings_[k].j) + ")");
}

double ising_energy(const IsingProblem& p, const SpinState& s) {
  if (static_cast<int>(s.spins.size()) != p.n())
    throw std::invalid_argument("spin state length " + std::to_string(s.spins.size()) +
                                " does not match problem size " + std::to_string(p.n()));
  for (auto v : s.spins)
    if (v != 1 && v != -1) throw std::invalid_argument("spin entry outside {-1,+1}");
  double e = p.offset();
  // -1/2 sum_{i,j} J_ij s_i s_j over the full symmetric matrix equals
  // -sum_{i<j} J_ij s_i s_j over the stored upper triangle.
  for (const auto& c : p.couplings()) e -= c.w * s.spins[c.i] * s.spins[c.j];
  for (int i = 0; i < p.n(); ++i) e += p.field()[i] * s.spins[i];
  return e;
}

IsingProblem qubo_to_ising(const QuboProblem& q) {
  const int n = q.n();
  std::vector<double> h(n, 0.0);
  double offset = 0.0;
  for (int i = 0; i < n; ++i) {
    h[i] += q.bias()[i] / 2.0;
    offset += q.bias()[i] / 2.0;
  }
  std::vector<PairTerm> couplings;
  couplings.reserve(q.pairs().size());
  for (const auto& pt : q.pairs()) {
    couplings.push_back({pt.i, pt.j, -pt.w / 4.0});
    h[pt.i] += pt.w / 4.0;
    h[pt.j] += pt.w / 4.0;
    offset += pt.w / 4.0;
  }
  return IsingProblem(n, std::move(couplings), std::move(h), offset);
}

BinaryState binary_from_spin(const SpinState& s) {
  BinaryState t;
  t.bits.resize(s.spins.size());
  for (std::size_t i = 0; i < s.spins.size(); ++i) {
    if (s.spins[i] != 1 && s.spins[i] != -1)
      throw std::invalid_argument("spin entry outside {-1,+1}");
    t.bits[i] = s.spins[i] > 0 ? 1 : 0;
  }
  return t;
}

SpinState spin_from_binary(const BinaryState& t) {
  SpinState s;
  s.spins.resize(t.bits.size());
  for (std::size_t i = 0; i < t.bits.size(); ++i) {
    if (t.bits[i] != 0 && t.bits[i] != 1)
      throw std::invalid_argument("binary entry outside {0,1}");
    s.spins[i] = t.bits[i] ? 1 : -1;
  }
  return s;
}

}  // namespace bft
