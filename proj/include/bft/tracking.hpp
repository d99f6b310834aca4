#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bft/qubo.hpp"

namespace bft {

/// One silicon measurement. Coordinates in mm unless the config rescales
/// them; layer_index is the global barrel layer 0..9, or -1 for hits outside
/// the indexed barrel (the seeder skips those). particle_id 0 means noise or
/// unknown truth.
struct Hit {
  std::int64_t hit_id = 0;
  double x = 0.0, y = 0.0, z = 0.0;
  int layer_index = -1;
  std::int64_t particle_id = 0;

  double r() const { return std::hypot(x, y); }
};

/// Two-hit segment, inner at strictly smaller transverse radius.
struct Doublet {
  std::int64_t inner_hit = 0;
  std::int64_t outer_hit = 0;
  double dz = 0.0;
  double dr = 0.0;
};

/// Three-hit segment with the kinematics feeding the QUBO coefficients.
/// dtheta is the internal consistency angle: the absolute polar-angle
/// difference between the triplet's two constituent doublets.
struct Triplet {
  std::array<std::int64_t, 3> hits{};
  double qpt = 0.0;    // signed q/pT, GeV^-1
  double theta = 0.0;  // polar angle of the first-to-last displacement, rad
  double d0 = 0.0;     // transverse impact parameter, coordinate units
  double z0 = 0.0;     // longitudinal impact parameter, coordinate units
  double dtheta = 0.0;
  int holes = 0;
};

struct TrackingConfig {
  // bias-weight shape parameters
  double alpha = 0.5;
  double beta = 0.2;
  double gamma = 1.0;
  double lambda = 0.5;
  // triplet quality cuts
  double qpt_max = 8e-4;       // GeV^-1
  double dtheta_max = 0.1;     // rad
  int max_holes = 1;
  // quadruplet cuts
  double dqpt_pair_max = 1e-4; // GeV^-1
  double s_min = 0.2;
  // track-candidate floors
  int min_track_hits = 4;
  int min_seed_track_hits = 5;
  // field and units
  double b_field = 2.0;        // T
  double coord_unit_mm = 1.0;  // mm per coordinate unit
  // doublet seeding cuts
  int layer_gap_max = 2;
  double dz_over_dr_max = 2.0;
  double z_origin_max = 200.0; // coordinate units
};

struct TripletKinematics {
  double qpt = 0.0;
  double theta = 0.0;
  double d0 = 0.0;
  double z0 = 0.0;
  int holes = 0;
};

/// Reconstructed track: hit ids in increasing radius plus the QUBO variable
/// indices it was assembled from.
struct TrackCandidate {
  std::vector<std::int64_t> hit_ids;
  std::vector<int> triplet_indices;
};

/// Assembled problem plus the variable -> triplet index map. Only triplets
/// surviving the quadruplet chain pruning become variables.
struct QuboBuild {
  QuboProblem problem;
  std::vector<Triplet> variables;
  /// Set when pruning removed every triplet (the empty problem is valid).
  bool empty_flagged = false;
};

/// Seeds doublets between hits on nearby layers: layer gap in
/// [1, layer_gap_max], |dz| <= dz_over_dr_max * dr, and the straight-line
/// extrapolation to r=0 within z_origin_max. Output ordered by
/// (inner id, outer id).
std::vector<Doublet> generate_doublets(const std::vector<Hit>& hits,
                                       const TrackingConfig& cfg);

/// Circumcircle-based kinematics of three hits at increasing transverse
/// radius: pT = 0.3 * B[T] * R[m], charge sign from the turn orientation,
/// collinear hits treated as the infinite-radius limit (qpt = 0). d0 is the
/// circle's distance of closest approach to the beam axis; z0 the
/// z-intercept of the line fit in (transverse arc length, z). Holes count
/// unoccupied layers strictly between the end layers.
TripletKinematics triplet_kinematics(const Hit& h1, const Hit& h2, const Hit& h3,
                                     const TrackingConfig& cfg);

/// Joins doublet pairs sharing a middle hit and applies the triplet quality
/// cuts (holes, |q/pT|, internal angle consistency).
std::vector<Triplet> build_triplets(const std::vector<Doublet>& doublets,
                                    const std::vector<Hit>& hits,
                                    const TrackingConfig& cfg);

/// Momentum-consistency strength of two consecutive triplets:
///   S = (1 - (|d(q/pT)| + max(dtheta_i, dtheta_j)) / 2) / (1 + H_i + H_j)^2.
double pair_strength(const Triplet& ti, const Triplet& tj);

/// Triplet bias a_i = alpha (1 - exp(-|d0|/gamma)) + beta (1 - exp(-|z0|/lambda)).
double bias_weight(const Triplet& t, const TrackingConfig& cfg);

/// Builds the QUBO: bias per triplet; pair coefficients -S for chain-forming
/// consecutive pairs passing the quadruplet cuts, +1 for any other hit
/// sharing (conflict). Quadruplets must extend to a chain of at least
/// min_seed_track_hits hits; triplets on no surviving quadruplet are dropped.
QuboBuild assemble_qubo(const std::vector<Triplet>& triplets,
                        const TrackingConfig& cfg);

/// Converts a solver selection back to track candidates: selected triplets
/// expand to doublets, duplicates collapse, remaining per-hit conflicts are
/// resolved greedily by the parent triplet's summed pair compatibility, and
/// the surviving doublets are chained. Candidates below min_track_hits are
/// discarded.
std::vector<TrackCandidate> extract_tracks(const BinaryState& selected,
                                           const QuboBuild& build,
                                           const TrackingConfig& cfg);

}  // namespace bft
