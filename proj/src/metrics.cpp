#include "bft/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace bft {

DoubletSet truth_doublets(const std::vector<Hit>& hits, const TrackingConfig& cfg) {
  std::map<std::int64_t, std::vector<const Hit*>> by_particle;
  for (const auto& h : hits)
    if (h.particle_id != 0) by_particle[h.particle_id].push_back(&h);

  DoubletSet out;
  for (auto& [pid, track] : by_particle) {
    if (static_cast<int>(track.size()) < cfg.min_track_hits) continue;
    std::sort(track.begin(), track.end(), [](const Hit* a, const Hit* b) {
      const double ra = a->r(), rb = b->r();
      if (ra != rb) return ra < rb;
      return a->hit_id < b->hit_id;
    });
    for (std::size_t k = 1; k < track.size(); ++k)
      out.insert(std::minmax(track[k - 1]->hit_id, track[k]->hit_id));
  }
  return out;
}

EvalReport evaluate(const std::vector<TrackCandidate>& candidates,
                    const DoubletSet& truth, const std::string& event_label) {
  DoubletSet recon;
  for (const auto& c : candidates)
    for (std::size_t k = 1; k < c.hit_ids.size(); ++k)
      recon.insert(std::minmax(c.hit_ids[k - 1], c.hit_ids[k]));

  EvalReport rep;
  for (const auto& d : recon)
    truth.count(d) ? ++rep.total.tp : ++rep.total.fp;
  rep.total.fn = static_cast<long long>(truth.size()) - rep.total.tp;

  if (rep.total.tp + rep.total.fn > 0) {
    rep.efficiency_defined = true;
    rep.efficiency = static_cast<double>(rep.total.tp) /
                     static_cast<double>(rep.total.tp + rep.total.fn);
  }
  if (rep.total.tp + rep.total.fp > 0) {
    rep.purity_defined = true;
    rep.purity = static_cast<double>(rep.total.tp) /
                 static_cast<double>(rep.total.tp + rep.total.fp);
  }
  rep.per_event.push_back({event_label, rep.total});
  return rep;
}

TttReport compute_ttt(const SolveRun& run, double target_fraction, double confidence) {
  if (run.best_index < 0)
    throw std::invalid_argument("run has no successful shot to set a target from");
  return compute_ttt_at(run, target_fraction * run.shots[run.best_index].energy,
                        confidence);
}

TttReport compute_ttt_at(const SolveRun& run, double target_energy, double confidence) {
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw std::invalid_argument("confidence must lie in (0, 1)");

  TttReport rep;
  rep.target_energy = target_energy;
  rep.confidence = confidence;

  const int total = static_cast<int>(run.shots.size());
  rep.first_hit_seconds.resize(total);
  std::vector<double> hits;
  for (int s = 0; s < total; ++s) {
    for (const auto& row : run.shots[s].trace) {
      if (row.best_energy <= target_energy) {
        rep.first_hit_seconds[s] = row.elapsed_seconds;
        hits.push_back(row.elapsed_seconds);
        break;
      }
    }
  }
  if (total > 0)
    rep.success_fraction = static_cast<double>(hits.size()) / static_cast<double>(total);
  if (hits.empty()) return rep;  // ttt stays absent

  std::sort(hits.begin(), hits.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < hits.size(); ++k) {
    // p(t) at t = hits[k] counts every hit at or before it, including ties.
    std::size_t count = k + 1;
    while (count < hits.size() && hits[count] == hits[k]) ++count;
    const double p = static_cast<double>(count) / static_cast<double>(total);
    const double t = hits[k];
    const double cand =
        p >= confidence ? t : t * std::log(1.0 - confidence) / std::log(1.0 - p);
    best = std::min(best, cand);
  }
  rep.ttt_seconds = best;
  return rep;
}

}  // namespace bft
