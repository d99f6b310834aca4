#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bft/metrics.hpp"
#include "bft/qubo.hpp"
#include "bft/solvers.hpp"
#include "bft/tracking.hpp"

namespace bft {

/// Malformed or unreadable input data. Messages name the offending file and,
/// for parse failures, the row and column.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Generator truth for one synthetic track.
struct TruthParticle {
  std::int64_t id = 0;
  double qpt = 0.0;   // signed q/pT, GeV^-1
  double theta = 0.0; // rad
  double phi0 = 0.0;  // rad
  double d0 = 0.0;    // mm
  double z0 = 0.0;    // mm
};

struct EventBundle {
  std::int64_t event_id = 0;
  std::vector<Hit> hits;
  /// hit_id -> particle_id for every hit with known truth.
  std::map<std::int64_t, std::int64_t> truth;
  /// Synthetic-generator truth; empty for loaded events.
  std::vector<TruthParticle> particles;
  std::string source;
  long long rows_total = 0;
  /// Set when filtering left no hits.
  bool empty_flagged = false;
};

/// (volume_id, layer_id) -> global barrel layer index. The default follows
/// the public TrackML layout: volume 8 layers 2/4/6/8 -> 0..3, volume 13 ->
/// 4..7, volume 17 layers 2/4 -> 8..9.
struct BarrelLayout {
  std::map<std::pair<int, int>, int> layer_index;
  static BarrelLayout trackml_default();
};

/// Parses TrackML hits + truth CSVs. With barrel_only, keeps only hits whose
/// (volume, layer) is in the layout; otherwise keeps every row, leaving
/// layer_index = -1 for unmapped hits. Hits ordered by hit_id.
EventBundle load_trackml_event(const std::string& hits_path,
                               const std::string& truth_path, bool barrel_only,
                               const BarrelLayout& layout = BarrelLayout::trackml_default());

/// Cylindrical toy detector for the synthetic generator.
struct SynthGeometry {
  std::vector<double> layer_radii_mm;
  double half_length_mm = 1100.0;
  double b_field_t = 2.0;
  static SynthGeometry trackml_barrel();
};

/// Samples helix tracks in a uniform solenoid field and intersects them with
/// the layer cylinders; every track crosses all layers by construction
/// (pT in [1500, 10000] GeV so |q/pT| clears the curvature cut, |eta| <= 0.5,
/// d0 ~ N(0, 0.05 mm), z0 uniform in [-30, 30] mm, uniform azimuth). Noise
/// hits are added at noise_fraction of the signal hit count, uniform on
/// random layers. Fully reproducible from (n_tracks, noise_fraction, seed,
/// geometry).
EventBundle generate_synthetic_event(int n_tracks, double noise_fraction,
                                     std::uint64_t seed,
                                     const SynthGeometry& geometry = SynthGeometry::trackml_barrel());

/// Writes an event back out in TrackML CSV format (hits + truth). Barrel
/// layer indices map to (volume, layer) through the inverse of the layout.
void write_trackml_event(const EventBundle& event, const std::string& hits_path,
                         const std::string& truth_path,
                         const BarrelLayout& layout = BarrelLayout::trackml_default());

// ---------------------------------------------------------------------------
// JSON / CSV serialization. All writers are atomic (write to a temporary
// file in the target directory, then rename).
// ---------------------------------------------------------------------------

void save_qubo(const QuboProblem& p, const std::string& path,
               const std::map<std::string, std::string>& meta = {});
QuboProblem load_qubo(const std::string& path);

/// Sidecar {"variables": [[hit ids], ...]} next to a tracking QUBO.
void save_index_map(const QuboBuild& build, const std::string& path);
std::vector<std::array<std::int64_t, 3>> load_index_map(const std::string& path);

void save_solve_run(const SolveRun& run, const std::string& path);
SolveRun load_solve_run(const std::string& path);

/// Per-step trace export: shot,step,elapsed_seconds,best_energy.
void save_trace_csv(const SolveRun& run, const std::string& path);

void save_eval_report(const EvalReport& report, const std::string& path);
void save_ttt_report(const TttReport& report, const std::string& path);

/// Serializes a run to JSON text (the save_solve_run payload) without
/// touching the filesystem.
std::string solve_run_to_json(const SolveRun& run);

}  // namespace bft
