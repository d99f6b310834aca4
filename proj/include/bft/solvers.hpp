#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "bft/ising.hpp"

namespace bft {

// ---------------------------------------------------------------------------
// Deterministic per-shot random stream.
// ---------------------------------------------------------------------------

/// Random stream fully determined by (seed, stream index). Doubles are built
/// from the top 53 bits of the raw draws so results do not depend on the
/// standard library's distribution implementations.
class ShotRng {
 public:
  ShotRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  int uniform_int(int n);

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class SbVariant { adiabatic, ballistic, discrete };

const char* to_string(SbVariant v);
SbVariant sb_variant_from_string(const std::string& name);

struct SbConfig {
  SbVariant variant = SbVariant::ballistic;
  double a0 = 1.0;
  double dt = 1.0;
  int steps = 1000;
  /// Coupling strength; unset -> derived once from the problem (auto_c0
  /// formula, or 1.0 when the problem has no couplings).
  std::optional<double> c0;
  int shots = 50;
  std::uint64_t seed = 0;
  /// Record a trace row every trace_stride completed steps.
  int trace_stride = 10;
  /// Worker threads for the shot loop; 0 = hardware concurrency.
  int threads = 0;
};

struct SaConfig {
  int sweeps = 1000;
  /// Geometric schedule bounds (beta_min, beta_max); unset -> derived from
  /// the single-flip energy bounds of the problem.
  std::optional<std::pair<double, double>> beta_range;
  /// Explicit per-sweep schedule; when non-empty it overrides sweeps and
  /// beta_range.
  std::vector<double> beta_schedule;
  int shots = 50;
  std::uint64_t seed = 0;
  int trace_stride = 10;
  int threads = 0;
};

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct TraceRow {
  double elapsed_seconds = 0.0;
  long step = 0;
  double best_energy = 0.0;
};

struct ShotResult {
  SpinState spins;
  double energy = 0.0;
  /// Set when the overflow guard aborted the shot; spins/energy then hold the
  /// best configuration seen before the abort.
  bool flagged = false;
  std::vector<TraceRow> trace;
  /// Optional energy-threshold -> elapsed-seconds map (benchmark plumbing).
  std::map<double, double> first_hit;
};

struct SolveRun {
  std::variant<SbConfig, SaConfig> config;
  std::vector<ShotResult> shots;
  /// Index of the minimal-energy unflagged shot, ties to the lowest index;
  /// -1 when every shot was aborted.
  int best_index = -1;
  double wall_clock_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Simulated bifurcation
// ---------------------------------------------------------------------------

/// Positions/momenta of one SB trajectory.
struct SbState {
  std::vector<double> x;
  std::vector<double> y;
  int step = 0;
};

/// Linear ramp a(t) = a0 * t_step / steps. Rejects t_step outside
/// [0, steps].
double anneal_schedule_a(int t_step, const SbConfig& cfg);

/// Coupling strength 0.5 / (sigma_J * sqrt(n)), sigma_J the RMS of the
/// nonzero entries of the full symmetric coupling matrix. Rejects problems
/// with an all-zero J.
double auto_c0(const IsingProblem& p);

/// One symplectic Euler step of the configured variant: the momentum update
/// reads only pre-step positions, then the position update reads the fresh
/// momenta. Ballistic/discrete variants finish by clamping |x_i| > 1 to
/// sign(x_i) with y_i = 0. Advances state.step.
void sb_step(const IsingProblem& p, const SbConfig& cfg, double c0, SbState& state);

SolveRun solve_asb(const IsingProblem& p, const SbConfig& cfg);
SolveRun solve_bsb(const IsingProblem& p, const SbConfig& cfg);
SolveRun solve_dsb(const IsingProblem& p, const SbConfig& cfg);

// ---------------------------------------------------------------------------
// Simulated annealing
// ---------------------------------------------------------------------------

/// Metropolis rule: accept iff u < exp(-delta_e * beta) with u uniform in
/// [0, 1). Covers delta_e <= 0 (always accepted) without a branch.
bool metropolis_accept(double delta_e, double beta, ShotRng& rng);

/// Default geometric schedule bounds derived from the largest/smallest
/// per-spin single-flip magnitude bounds 2(|h_i| + sum_j |J_ij|).
std::pair<double, double> default_beta_range(const IsingProblem& p);

SolveRun solve_sa(const IsingProblem& p, const SaConfig& cfg);

}  // namespace bft
