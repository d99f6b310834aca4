#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bft/solvers.hpp"
#include "bft/tracking.hpp"

namespace bft {

/// Unordered hit-id pairs, stored with first < second.
using DoubletSet = std::set<std::pair<std::int64_t, std::int64_t>>;

struct EvalCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

struct EvalReport {
  EvalCounts total;
  double efficiency = 0.0;  // tp / (tp + fn)
  double purity = 0.0;      // tp / (tp + fp)
  bool efficiency_defined = false;
  bool purity_defined = false;
  std::vector<std::pair<std::string, EvalCounts>> per_event;
};

struct TttReport {
  double target_energy = 0.0;
  double confidence = 0.99;
  /// Absent when no shot reached the target.
  std::optional<double> ttt_seconds;
  /// Per-shot earliest time the best-so-far energy reached the target.
  std::vector<std::optional<double>> first_hit_seconds;
  double success_fraction = 0.0;
};

/// Reference doublets: for every particle with at least min_track_hits hits,
/// the consecutive pairs of its hits sorted by transverse radius. Noise hits
/// (particle_id 0) contribute nothing.
DoubletSet truth_doublets(const std::vector<Hit>& hits, const TrackingConfig& cfg);

/// Doublet-level recall/precision of the candidates against the truth set.
/// An empty truth set leaves efficiency undefined (flagged); purity is still
/// computed when any doublet was reconstructed.
EvalReport evaluate(const std::vector<TrackCandidate>& candidates,
                    const DoubletSet& truth,
                    const std::string& event_label = "");

/// Time-to-target with the restart estimator: the target is
/// target_fraction * (best energy over the run's shots), applied to the
/// signed energy; TTT = min over observed first-hit times t of
/// t * ln(1 - confidence) / ln(1 - p(t)), or t itself once p(t) reaches the
/// confidence. Absent when no shot reached the target.
TttReport compute_ttt(const SolveRun& run, double target_fraction,
                      double confidence);

/// Same estimator against an explicitly supplied target energy, for sharing
/// one reference across several runs.
TttReport compute_ttt_at(const SolveRun& run, double target_energy,
                         double confidence);

}  // namespace bft
