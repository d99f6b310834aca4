#include "bft/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

namespace bft {

namespace {

// Polar angle of the displacement p1 -> p2.
double segment_theta(const Hit& a, const Hit& b) {
  return std::atan2(std::hypot(b.x - a.x, b.y - a.y), b.z - a.z);
}

int count_holes(int l1, int l2, int l3) {
  const int lo = std::min(l1, l3);
  const int hi = std::max(l1, l3);
  int between = hi - lo - 1;
  if (between < 0) between = 0;
  if (l2 > lo && l2 < hi) --between;
  return between < 0 ? 0 : between;
}

struct HitIndex {
  std::unordered_map<std::int64_t, const Hit*> by_id;

  explicit HitIndex(const std::vector<Hit>& hits) {
    by_id.reserve(hits.size());
    for (const auto& h : hits)
      if (!by_id.emplace(h.hit_id, &h).second)
        throw std::invalid_argument("duplicate hit id " + std::to_string(h.hit_id));
  }

  const Hit& at(std::int64_t id) const {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::invalid_argument("unknown hit id " + std::to_string(id));
    return *it->second;
  }
};

// ti -> tj extends the chain outward by one hit.
bool chain_consecutive(const Triplet& ti, const Triplet& tj) {
  return ti.hits[1] == tj.hits[0] && ti.hits[2] == tj.hits[1];
}

int shared_hits(const Triplet& a, const Triplet& b) {
  int count = 0;
  for (auto ha : a.hits)
    for (auto hb : b.hits)
      if (ha == hb) ++count;
  return count;
}

}  // namespace

std::vector<Doublet> generate_doublets(const std::vector<Hit>& hits,
                                       const TrackingConfig& cfg) {
  HitIndex index(hits);  // validates id uniqueness
  (void)index;

  std::map<int, std::vector<const Hit*>> by_layer;
  for (const auto& h : hits)
    if (h.layer_index >= 0) by_layer[h.layer_index].push_back(&h);

  std::vector<Doublet> out;
  for (const auto& [layer, inner_hits] : by_layer) {
    for (int gap = 1; gap <= cfg.layer_gap_max; ++gap) {
      auto it = by_layer.find(layer + gap);
      if (it == by_layer.end()) continue;
      for (const Hit* a : inner_hits) {
        const double ra = a->r();
        for (const Hit* b : it->second) {
          const double dr = b->r() - ra;
          if (!(dr > 0.0)) continue;
          const double dz = b->z - a->z;
          if (std::abs(dz) > cfg.dz_over_dr_max * dr) continue;
          // straight-line extrapolation to the beam axis
          const double z_at_origin = a->z - dz / dr * ra;
          if (std::abs(z_at_origin) > cfg.z_origin_max) continue;
          out.push_back({a->hit_id, b->hit_id, dz, dr});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Doublet& a, const Doublet& b) {
    return std::pair(a.inner_hit, a.outer_hit) < std::pair(b.inner_hit, b.outer_hit);
  });
  return out;
}

TripletKinematics triplet_kinematics(const Hit& h1, const Hit& h2, const Hit& h3,
                                     const TrackingConfig& cfg) {
  const double ax = h1.x, ay = h1.y;
  const double bx = h2.x, by = h2.y;
  const double cx = h3.x, cy = h3.y;
  if ((ax == bx && ay == by) || (bx == cx && by == cy) || (ax == cx && ay == cy))
    throw std::invalid_argument("duplicate transverse points in triplet");
  if (!(h1.r() < h2.r() && h2.r() < h3.r()))
    throw std::invalid_argument("triplet hits not at increasing transverse radius");

  TripletKinematics k;
  k.theta = segment_theta(h1, h3);
  k.holes = count_holes(h1.layer_index, h2.layer_index, h3.layer_index);

  const double cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx);
  double s1, s2, s3;  // transverse arc length of each hit from the perigee
  if (cross == 0.0) {
    // Collinear: infinite-radius limit.
    k.qpt = 0.0;
    double dx = cx - ax, dy = cy - ay;
    const double len = std::hypot(dx, dy);
    dx /= len;
    dy /= len;
    k.d0 = std::abs(ax * dy - ay * dx);
    // The perigee projects to 0 along the line, so s is just the projection.
    s1 = ax * dx + ay * dy;
    s2 = bx * dx + by * dy;
    s3 = cx * dx + cy * dy;
  } else {
    // Circumcenter of the three transverse points.
    const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    const double na = ax * ax + ay * ay;
    const double nb = bx * bx + by * by;
    const double nc = cx * cx + cy * cy;
    const double ux = (na * (by - cy) + nb * (cy - ay) + nc * (ay - by)) / d;
    const double uy = (na * (cx - bx) + nb * (ax - cx) + nc * (bx - ax)) / d;
    const double radius = std::hypot(ax - ux, ay - uy);
    const double pt = 0.3 * cfg.b_field * (radius * cfg.coord_unit_mm / 1000.0);
    const double q = cross > 0.0 ? -1.0 : 1.0;  // positive charge turns clockwise
    k.qpt = q / pt;
    const double center_dist = std::hypot(ux, uy);
    k.d0 = std::abs(center_dist - radius);

    // Perigee point on the circle; arc lengths signed along the motion.
    double nx = 1.0, ny = 0.0;
    if (center_dist > 0.0) {
      nx = ux / center_dist;
      ny = uy / center_dist;
    }
    const double px = ux - radius * nx, py = uy - radius * ny;
    const double rx = px - ux, ry = py - uy;  // reference spoke
    const double orient = cross > 0.0 ? 1.0 : -1.0;
    auto arc = [&](double hx, double hy) {
      const double vx = hx - ux, vy = hy - uy;
      const double ang = std::atan2(rx * vy - ry * vx, rx * vx + ry * vy);
      return radius * ang * orient;
    };
    s1 = arc(ax, ay);
    s2 = arc(bx, by);
    s3 = arc(cx, cy);
  }

  // Least-squares z-intercept over (arc length, z).
  const double sm = (s1 + s2 + s3) / 3.0;
  const double zm = (h1.z + h2.z + h3.z) / 3.0;
  const double var = (s1 - sm) * (s1 - sm) + (s2 - sm) * (s2 - sm) + (s3 - sm) * (s3 - sm);
  const double cov =
      (s1 - sm) * (h1.z - zm) + (s2 - sm) * (h2.z - zm) + (s3 - sm) * (h3.z - zm);
  const double slope = cov / var;
  k.z0 = zm - slope * sm;
  return k;
}

std::vector<Triplet> build_triplets(const std::vector<Doublet>& doublets,
                                    const std::vector<Hit>& hits,
                                    const TrackingConfig& cfg) {
  HitIndex index(hits);
  std::unordered_map<std::int64_t, std::vector<int>> by_inner;
  for (int i = 0; i < static_cast<int>(doublets.size()); ++i)
    by_inner[doublets[i].inner_hit].push_back(i);

  std::vector<Triplet> out;
  for (const auto& d1 : doublets) {
    auto it = by_inner.find(d1.outer_hit);
    if (it == by_inner.end()) continue;
    const Hit& a = index.at(d1.inner_hit);
    const Hit& b = index.at(d1.outer_hit);
    for (int j : it->second) {
      const Doublet& d2 = doublets[j];
      const Hit& c = index.at(d2.outer_hit);
      const TripletKinematics kin = triplet_kinematics(a, b, c, cfg);
      if (kin.holes > cfg.max_holes) continue;
      if (std::abs(kin.qpt) > cfg.qpt_max) continue;
      const double dtheta = std::abs(segment_theta(a, b) - segment_theta(b, c));
      if (dtheta > cfg.dtheta_max) continue;
      Triplet t;
      t.hits = {a.hit_id, b.hit_id, c.hit_id};
      t.qpt = kin.qpt;
      t.theta = kin.theta;
      t.d0 = kin.d0;
      t.z0 = kin.z0;
      t.dtheta = dtheta;
      t.holes = kin.holes;
      out.push_back(t);
    }
  }
  return out;
}

double pair_strength(const Triplet& ti, const Triplet& tj) {
  const double dqpt = std::abs(ti.qpt - tj.qpt);
  const double dtheta = std::max(ti.dtheta, tj.dtheta);
  const double denom = 1.0 + ti.holes + tj.holes;
  return (1.0 - 0.5 * (dqpt + dtheta)) / (denom * denom);
}

double bias_weight(const Triplet& t, const TrackingConfig& cfg) {
  return cfg.alpha * (1.0 - std::exp(-std::abs(t.d0) / cfg.gamma)) +
         cfg.beta * (1.0 - std::exp(-std::abs(t.z0) / cfg.lambda));
}

QuboBuild assemble_qubo(const std::vector<Triplet>& triplets,
                        const TrackingConfig& cfg) {
  const int nt = static_cast<int>(triplets.size());

  // Candidate pairs via shared hits.
  std::unordered_map<std::int64_t, std::vector<int>> by_hit;
  for (int i = 0; i < nt; ++i)
    for (auto h : triplets[i].hits) by_hit[h].push_back(i);
  std::vector<std::pair<int, int>> sharing;
  for (const auto& [hit, owners] : by_hit)
    for (std::size_t a = 0; a < owners.size(); ++a)
      for (std::size_t b = a + 1; b < owners.size(); ++b)
        sharing.push_back(std::minmax(owners[a], owners[b]));
  std::sort(sharing.begin(), sharing.end());
  sharing.erase(std::unique(sharing.begin(), sharing.end()), sharing.end());

  // Chain edges: consecutive pairs passing the quadruplet cuts.
  struct Edge {
    int from, to;  // triplet indices, inner -> outer
    double strength;
  };
  std::vector<Edge> edges;
  std::vector<char> is_edge_pair(sharing.size(), 0);
  for (std::size_t p = 0; p < sharing.size(); ++p) {
    const auto [i, j] = sharing[p];
    if (shared_hits(triplets[i], triplets[j]) != 2) continue;
    int from = -1, to = -1;
    if (chain_consecutive(triplets[i], triplets[j])) {
      from = i;
      to = j;
    } else if (chain_consecutive(triplets[j], triplets[i])) {
      from = j;
      to = i;
    } else {
      continue;  // branching share: conflict
    }
    if (std::abs(triplets[i].qpt - triplets[j].qpt) > cfg.dqpt_pair_max) continue;
    const double s = pair_strength(triplets[i], triplets[j]);
    if (!(s > cfg.s_min)) continue;
    edges.push_back({from, to, s});
    is_edge_pair[p] = 1;
  }

  // Longest chain lengths (in triplets) through the edge DAG.
  std::vector<std::vector<int>> succ(nt), pred(nt);
  for (const auto& e : edges) {
    succ[e.from].push_back(e.to);
    pred[e.to].push_back(e.from);
  }
  auto longest = [&](const std::vector<std::vector<int>>& next) {
    std::vector<int> len(nt, 0);  // 0 = unvisited; chains count triplets
    std::vector<char> onstack(nt, 0);
    // Iterative DFS with an explicit stack; the graph is acyclic because
    // every edge strictly advances the outer hit radius.
    for (int start = 0; start < nt; ++start) {
      if (len[start]) continue;
      std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
      onstack[start] = 1;
      while (!stack.empty()) {
        auto& [v, child] = stack.back();
        if (child < next[v].size()) {
          const int w = next[v][child++];
          if (onstack[w]) throw std::invalid_argument("cyclic triplet chain");
          if (!len[w]) {
            stack.push_back({w, 0});
            onstack[w] = 1;
          }
        } else {
          int best = 0;
          for (int w : next[v]) best = std::max(best, len[w]);
          len[v] = best + 1;
          onstack[v] = 0;
          stack.pop_back();
        }
      }
    }
    return len;
  };
  const std::vector<int> fwd = longest(succ);  // longest chain starting here
  const std::vector<int> bwd = longest(pred);  // longest chain ending here

  // An edge survives when some chain through it reaches the seed floor.
  const int need = cfg.min_seed_track_hits - 2;  // triplets in the chain
  std::vector<char> keep(nt, 0);
  std::vector<char> edge_kept(edges.size(), 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (bwd[edges[e].from] + fwd[edges[e].to] < need) continue;
    edge_kept[e] = 1;
    keep[edges[e].from] = 1;
    keep[edges[e].to] = 1;
  }

  QuboBuild build;
  std::vector<int> remap(nt, -1);
  for (int i = 0; i < nt; ++i) {
    if (!keep[i]) continue;
    remap[i] = static_cast<int>(build.variables.size());
    build.variables.push_back(triplets[i]);
  }
  const int n = static_cast<int>(build.variables.size());
  if (n == 0) {
    build.problem = QuboProblem(0, {}, {});
    build.empty_flagged = true;
    return build;
  }

  std::vector<double> bias(n);
  for (int i = 0; i < n; ++i) bias[i] = bias_weight(build.variables[i], cfg);

  std::map<std::pair<int, int>, double> coeff;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!edge_kept[e]) continue;
    const auto [i, j] = std::minmax(remap[edges[e].from], remap[edges[e].to]);
    coeff[{i, j}] = -edges[e].strength;
  }
  for (const auto& [i, j] : sharing) {
    if (remap[i] < 0 || remap[j] < 0) continue;
    // A single shared hit that is the end of one triplet and the start of
    // the other is a plain continuation along one track, not a conflict;
    // penalizing it would make every full chain lose to its own fragments.
    if (shared_hits(triplets[i], triplets[j]) == 1 &&
        (triplets[i].hits[2] == triplets[j].hits[0] ||
         triplets[j].hits[2] == triplets[i].hits[0]))
      continue;
    const auto key = std::minmax(remap[i], remap[j]);
    if (!coeff.count(key)) coeff[key] = 1.0;  // any other sharing is a conflict
  }

  std::vector<PairTerm> pairs;
  pairs.reserve(coeff.size());
  for (const auto& [key, w] : coeff) pairs.push_back({key.first, key.second, w});
  build.problem = QuboProblem(n, std::move(bias), std::move(pairs));
  return build;
}

std::vector<TrackCandidate> extract_tracks(const BinaryState& selected,
                                           const QuboBuild& build,
                                           const TrackingConfig& cfg) {
  const int n = static_cast<int>(build.variables.size());
  if (static_cast<int>(selected.bits.size()) != n)
    throw std::invalid_argument("selection length does not match variable count");

  // Summed pair compatibility of each variable (conflicts count against it).
  std::vector<double> compat(n, 0.0);
  for (const auto& pt : build.problem.pairs()) {
    compat[pt.i] -= pt.w;
    compat[pt.j] -= pt.w;
  }

  // Expand selected triplets to doublets; duplicates collapse into one claim
  // that remembers every parent and scores by the best of them.
  struct Claim {
    std::int64_t inner = 0, outer = 0;
    double score = -std::numeric_limits<double>::infinity();
    int best_parent = -1;
    std::vector<int> parents;
  };
  std::map<std::pair<std::int64_t, std::int64_t>, Claim> claims;
  for (int t = 0; t < n; ++t) {
    if (!selected.bits[t]) continue;
    const auto& hits = build.variables[t].hits;
    for (int leg = 0; leg < 2; ++leg) {
      Claim& c = claims[{hits[leg], hits[leg + 1]}];
      c.inner = hits[leg];
      c.outer = hits[leg + 1];
      c.parents.push_back(t);
      if (compat[t] > c.score || (compat[t] == c.score && t < c.best_parent)) {
        c.score = compat[t];
        c.best_parent = t;
      }
    }
  }

  std::vector<const Claim*> order;
  order.reserve(claims.size());
  for (const auto& [key, c] : claims) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const Claim* a, const Claim* b) {
    if (a->score != b->score) return a->score > b->score;
    if (a->best_parent != b->best_parent) return a->best_parent < b->best_parent;
    return std::pair(a->inner, a->outer) < std::pair(b->inner, b->outer);
  });

  // Each hit offers one incoming and one outgoing slot; claims are granted
  // best-first, which resolves the remaining conflicts.
  std::map<std::int64_t, const Claim*> next;
  std::set<std::int64_t> has_prev;
  for (const Claim* c : order) {
    if (next.count(c->inner) || has_prev.count(c->outer)) continue;
    next[c->inner] = c;
    has_prev.insert(c->outer);
  }

  std::vector<TrackCandidate> out;
  for (const auto& [head, first] : next) {
    if (has_prev.count(head)) continue;  // interior hit, not a chain start
    TrackCandidate cand;
    cand.hit_ids.push_back(head);
    std::set<int> sources;
    for (const Claim* c = first;;) {
      cand.hit_ids.push_back(c->outer);
      sources.insert(c->parents.begin(), c->parents.end());
      auto it = next.find(c->outer);
      if (it == next.end()) break;
      c = it->second;
    }
    if (static_cast<int>(cand.hit_ids.size()) < cfg.min_track_hits) continue;
    cand.triplet_indices.assign(sources.begin(), sources.end());
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace bft
