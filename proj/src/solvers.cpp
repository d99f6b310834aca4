#include "bft/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace bft {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline double sign_pm(double v) { return v >= 0.0 ? 1.0 : -1.0; }  // sign(0) = +1

// Energy of a raw +-1 configuration; inputs already validated at the problem
// boundary so no re-checks here.
double config_energy(const IsingProblem& p, const std::vector<std::int8_t>& s) {
  double e = p.offset();
  for (const auto& c : p.couplings()) e -= c.w * s[c.i] * s[c.j];
  for (int i = 0; i < p.n(); ++i) e += p.field()[i] * s[i];
  return e;
}

struct Adjacency {
  std::vector<int> offset;  // n + 1
  std::vector<int> col;
  std::vector<double> w;
};

Adjacency build_adjacency(const IsingProblem& p) {
  Adjacency a;
  a.offset.assign(p.n() + 1, 0);
  for (const auto& c : p.couplings()) {
    ++a.offset[c.i + 1];
    ++a.offset[c.j + 1];
  }
  for (int i = 0; i < p.n(); ++i) a.offset[i + 1] += a.offset[i];
  a.col.resize(2 * p.couplings().size());
  a.w.resize(2 * p.couplings().size());
  std::vector<int> cursor(a.offset.begin(), a.offset.end() - 1);
  for (const auto& c : p.couplings()) {
    a.col[cursor[c.i]] = c.j;
    a.w[cursor[c.i]++] = c.w;
    a.col[cursor[c.j]] = c.i;
    a.w[cursor[c.j]++] = c.w;
  }
  return a;
}

void validate_common(int shots, int trace_stride, int threads) {
  if (shots < 1) throw std::invalid_argument("shots must be positive");
  if (trace_stride < 1) throw std::invalid_argument("trace_stride must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be non-negative");
}

void validate_sb(const SbConfig& cfg) {
  if (!(cfg.a0 > 0.0) || !std::isfinite(cfg.a0))
    throw std::invalid_argument("a0 must be positive");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw std::invalid_argument("dt must be positive");
  if (cfg.steps < 1) throw std::invalid_argument("steps must be positive");
  if (cfg.c0 && (!(*cfg.c0 > 0.0) || !std::isfinite(*cfg.c0)))
    throw std::invalid_argument("c0 must be positive");
  validate_common(cfg.shots, cfg.trace_stride, cfg.threads);
}

// Run fn(shot) for every shot index, possibly across worker threads. Results
// land in shot-index order because fn writes to its own slot.
template <typename Fn>
void for_each_shot(int shots, int threads, Fn&& fn) {
  int workers = threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
  if (workers < 1) workers = 1;
  workers = std::min(workers, shots);
  if (workers <= 1) {
    for (int s = 0; s < shots; ++s) fn(s);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    try {
      for (int s = next.fetch_add(1); s < shots; s = next.fetch_add(1)) {
        if (failed.load()) return;
        fn(s);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
      failed.store(true);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int k = 0; k < workers; ++k) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int pick_best_index(const std::vector<ShotResult>& shots) {
  int best = -1;
  for (int s = 0; s < static_cast<int>(shots.size()); ++s) {
    if (shots[s].flagged) continue;
    if (best < 0 || shots[s].energy < shots[best].energy) best = s;
  }
  return best;
}

SolveRun run_sb(const IsingProblem& p, SbConfig cfg, SbVariant expected) {
  if (cfg.variant != expected)
    throw std::invalid_argument(std::string("config variant is ") + to_string(cfg.variant) +
                                ", expected " + to_string(expected));
  validate_sb(cfg);

  bool has_coupling = false;
  for (const auto& c : p.couplings())
    if (c.w != 0.0) has_coupling = true;
  const double c0 = cfg.c0 ? *cfg.c0 : (has_coupling ? auto_c0(p) : 1.0);
  cfg.c0 = c0;  // echo the effective value

  const int n = p.n();
  SolveRun run;
  run.config = cfg;
  run.shots.resize(cfg.shots);
  const auto t0 = Clock::now();

  for_each_shot(cfg.shots, cfg.threads, [&](int s) {
    ShotRng rng(cfg.seed, static_cast<std::uint64_t>(s));
    SbState st;
    st.x.resize(n);
    st.y.resize(n);
    for (int i = 0; i < n; ++i) st.x[i] = rng.uniform(-0.1, 0.1);
    for (int i = 0; i < n; ++i) st.y[i] = rng.uniform(-0.1, 0.1);

    ShotResult& out = run.shots[s];
    const auto shot_start = Clock::now();
    std::vector<std::int8_t> cur(n);
    std::vector<std::int8_t> best(n);
    double best_e = std::numeric_limits<double>::infinity();
    auto evaluate = [&] {
      for (int i = 0; i < n; ++i) cur[i] = st.x[i] >= 0.0 ? 1 : -1;
      const double e = config_energy(p, cur);
      if (e < best_e) {
        best_e = e;
        best = cur;
      }
      return e;
    };
    double cur_e = evaluate();
    out.trace.push_back({seconds_since(shot_start), 0, best_e});
    long last_recorded = 0;
    for (int k = 0; k < cfg.steps; ++k) {
      sb_step(p, cfg, c0, st);
      bool finite = true;
      for (int i = 0; i < n && finite; ++i)
        finite = std::isfinite(st.x[i]) && std::isfinite(st.y[i]);
      if (!finite) {
        out.flagged = true;
        break;
      }
      cur_e = evaluate();
      if (st.step % cfg.trace_stride == 0 && st.step != cfg.steps) {
        out.trace.push_back({seconds_since(shot_start), st.step, best_e});
        last_recorded = st.step;
      }
    }
    if (out.flagged) {
      out.spins.spins = best;
      out.energy = best_e;
      if (st.step != last_recorded)
        out.trace.push_back({seconds_since(shot_start), st.step, best_e});
    } else {
      out.spins.spins = cur;
      out.energy = cur_e;
      out.trace.push_back({seconds_since(shot_start), cfg.steps, best_e});
    }
  });

  run.best_index = pick_best_index(run.shots);
  run.wall_clock_seconds = seconds_since(t0);
  return run;
}

}  // namespace

ShotRng::ShotRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  gen_.seed(seq);
}

std::uint64_t ShotRng::next_u64() { return gen_(); }

double ShotRng::uniform(double lo, double hi) {
  // Top 53 bits -> [0, 1); identical on every conforming platform.
  const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

int ShotRng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int needs a positive bound");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t bound = std::numeric_limits<std::uint64_t>::max() / un * un;
  std::uint64_t r = next_u64();
  while (r >= bound) r = next_u64();
  return static_cast<int>(r % un);
}

const char* to_string(SbVariant v) {
  switch (v) {
    case SbVariant::adiabatic: return "adiabatic";
    case SbVariant::ballistic: return "ballistic";
    case SbVariant::discrete: return "discrete";
  }
  throw std::invalid_argument("unknown variant");
}

SbVariant sb_variant_from_string(const std::string& name) {
  if (name == "adiabatic" || name == "asb") return SbVariant::adiabatic;
  if (name == "ballistic" || name == "bsb") return SbVariant::ballistic;
  if (name == "discrete" || name == "dsb") return SbVariant::discrete;
  throw std::invalid_argument("unknown SB variant '" + name + "'");
}

double anneal_schedule_a(int t_step, const SbConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("steps must be positive");
  if (t_step < 0 || t_step > cfg.steps)
    throw std::invalid_argument("schedule step " + std::to_string(t_step) +
                                " outside [0, " + std::to_string(cfg.steps) + "]");
  return cfg.a0 * static_cast<double>(t_step) / static_cast<double>(cfg.steps);
}

double auto_c0(const IsingProblem& p) {
  if (p.n() == 0) throw std::invalid_argument("auto_c0 on an empty problem");
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& c : p.couplings()) {
    if (c.w == 0.0) continue;
    sum_sq += c.w * c.w;
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("auto_c0 needs at least one nonzero coupling");
  // RMS over the full symmetric matrix equals RMS over the stored triangle.
  const double sigma = std::sqrt(sum_sq / static_cast<double>(count));
  return 0.5 / (sigma * std::sqrt(static_cast<double>(p.n())));
}

void sb_step(const IsingProblem& p, const SbConfig& cfg, double c0, SbState& state) {
  const int n = p.n();
  if (static_cast<int>(state.x.size()) != n || static_cast<int>(state.y.size()) != n)
    throw std::invalid_argument("state size does not match problem size");
  const double a = anneal_schedule_a(state.step, cfg);

  // Coupling force from pre-step positions only.
  thread_local std::vector<double> force;
  force.assign(n, 0.0);
  if (cfg.variant == SbVariant::discrete) {
    for (const auto& c : p.couplings()) {
      force[c.i] += c.w * sign_pm(state.x[c.j]);
      force[c.j] += c.w * sign_pm(state.x[c.i]);
    }
  } else {
    for (const auto& c : p.couplings()) {
      force[c.i] += c.w * state.x[c.j];
      force[c.j] += c.w * state.x[c.i];
    }
  }

  const bool quartic = cfg.variant == SbVariant::adiabatic;
  for (int i = 0; i < n; ++i) {
    const double xi = state.x[i];
    const double drift =
        quartic ? -(xi * xi + cfg.a0 - a) * xi : -(cfg.a0 - a) * xi;
    state.y[i] += cfg.dt * (drift + c0 * (force[i] - p.field()[i]));
  }
  for (int i = 0; i < n; ++i) state.x[i] += cfg.dt * cfg.a0 * state.y[i];
  if (cfg.variant != SbVariant::adiabatic) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(state.x[i]) > 1.0) {
        state.x[i] = sign_pm(state.x[i]);
        state.y[i] = 0.0;
      }
    }
  }
  ++state.step;
}

SolveRun solve_asb(const IsingProblem& p, const SbConfig& cfg) {
  return run_sb(p, cfg, SbVariant::adiabatic);
}

SolveRun solve_bsb(const IsingProblem& p, const SbConfig& cfg) {
  return run_sb(p, cfg, SbVariant::ballistic);
}

SolveRun solve_dsb(const IsingProblem& p, const SbConfig& cfg) {
  return run_sb(p, cfg, SbVariant::discrete);
}

bool metropolis_accept(double delta_e, double beta, ShotRng& rng) {
  return rng.uniform(0.0, 1.0) < std::exp(-delta_e * beta);
}

std::pair<double, double> default_beta_range(const IsingProblem& p) {
  double m_max = 0.0;
  double m_min = std::numeric_limits<double>::infinity();
  std::vector<double> row(p.n(), 0.0);
  for (const auto& c : p.couplings()) {
    row[c.i] += std::abs(c.w);
    row[c.j] += std::abs(c.w);
  }
  for (int i = 0; i < p.n(); ++i) {
    const double m = 2.0 * (std::abs(p.field()[i]) + row[i]);
    if (m <= 0.0) continue;  // a free spin constrains neither bound
    m_max = std::max(m_max, m);
    m_min = std::min(m_min, m);
  }
  if (m_max == 0.0) return {std::log(2.0) / 2.0, std::log(100.0) / 2.0};
  return {std::log(2.0) / m_max, std::log(100.0) / m_min};
}

SolveRun solve_sa(const IsingProblem& p, const SaConfig& cfg_in) {
  SaConfig cfg = cfg_in;
  validate_common(cfg.shots, cfg.trace_stride, cfg.threads);
  for (double b : cfg.beta_schedule)
    if (!(b > 0.0) || !std::isfinite(b))
      throw std::invalid_argument("beta schedule entries must be positive");
  std::vector<double> schedule;
  if (!cfg.beta_schedule.empty()) {
    schedule = cfg.beta_schedule;
  } else {
    if (cfg.sweeps < 1) throw std::invalid_argument("sweeps must be positive");
    const auto [bmin, bmax] = cfg.beta_range ? *cfg.beta_range : default_beta_range(p);
    if (!(bmin > 0.0) || !(bmax >= bmin) || !std::isfinite(bmax))
      throw std::invalid_argument("invalid beta range");
    cfg.beta_range = std::pair(bmin, bmax);  // echo the effective range
    schedule.resize(cfg.sweeps);
    if (cfg.sweeps == 1) {
      schedule[0] = bmax;
    } else {
      const double ratio = std::pow(bmax / bmin, 1.0 / static_cast<double>(cfg.sweeps - 1));
      double b = bmin;
      for (int k = 0; k < cfg.sweeps; ++k, b *= ratio) schedule[k] = b;
      schedule[cfg.sweeps - 1] = bmax;  // pin the endpoint exactly
    }
  }
  const int sweeps = static_cast<int>(schedule.size());

  const int n = p.n();
  const Adjacency adj = build_adjacency(p);
  SolveRun run;
  run.config = cfg;
  run.shots.resize(cfg.shots);
  const auto t0 = Clock::now();

  for_each_shot(cfg.shots, cfg.threads, [&](int s) {
    ShotRng rng(cfg.seed, static_cast<std::uint64_t>(s));
    ShotResult& out = run.shots[s];
    const auto shot_start = Clock::now();

    std::vector<std::int8_t> spin(n);
    for (int i = 0; i < n; ++i) spin[i] = rng.uniform_int(2) ? 1 : -1;
    std::vector<double> local(n, 0.0);  // (J s)_i, kept incrementally
    for (int i = 0; i < n; ++i)
      for (int k = adj.offset[i]; k < adj.offset[i + 1]; ++k)
        local[i] += adj.w[k] * spin[adj.col[k]];

    double energy = config_energy(p, spin);
    double best_e = energy;
    out.trace.push_back({seconds_since(shot_start), 0, best_e});

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      const double beta = schedule[sweep];
      for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(i + 1)]);
      for (int idx : order) {
        const double delta = 2.0 * spin[idx] * (local[idx] - p.field()[idx]);
        if (metropolis_accept(delta, beta, rng)) {
          spin[idx] = -spin[idx];
          energy += delta;
          for (int k = adj.offset[idx]; k < adj.offset[idx + 1]; ++k)
            local[adj.col[k]] += 2.0 * adj.w[k] * spin[idx];
          if (energy < best_e) best_e = energy;
        }
      }
      const long step = sweep + 1;
      if (step % cfg.trace_stride == 0 && step != sweeps)
        out.trace.push_back({seconds_since(shot_start), step, best_e});
    }
    out.spins.spins = spin;
    out.energy = config_energy(p, spin);  // fresh sum, no drift
    out.trace.push_back({seconds_since(shot_start), sweeps, best_e});
  });

  run.best_index = pick_best_index(run.shots);
  run.wall_clock_seconds = seconds_since(t0);
  return run;
}

}  // namespace bft
