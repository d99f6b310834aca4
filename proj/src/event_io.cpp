#include "bft/event_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace bft {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Write-then-rename so readers never observe a half-written file.
void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error(path + ": cannot open for writing");
    out << contents;
    if (!out.flush()) throw data_error(path + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw data_error(path + ": rename failed: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

class CsvReader {
 public:
  CsvReader(const std::string& path, const std::vector<std::string>& required)
      : path_(path), in_(path) {
    if (!in_) throw data_error(path + ": cannot open");
    std::string header;
    if (!std::getline(in_, header)) throw data_error(path + ": empty file");
    const auto names = split_csv(header);
    for (std::size_t k = 0; k < names.size(); ++k) columns_[names[k]] = k;
    for (const auto& name : required)
      if (!columns_.count(name))
        throw data_error(path + ": missing column '" + name + "'");
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++row_;
      if (line.empty() || line == "\r") continue;
      fields_ = split_csv(line);
      return true;
    }
    return false;
  }

  long long row() const { return row_; }

  const std::string& raw(const std::string& column) const {
    const auto it = columns_.find(column);
    if (it == columns_.end())
      throw data_error(path_ + ": missing column '" + column + "'");
    const std::size_t k = it->second;
    if (k >= fields_.size())
      throw data_error(path_ + ": row " + std::to_string(row_) +
                       ": missing field '" + column + "'");
    return fields_[k];
  }

  double number(const std::string& column) const {
    const std::string& s = raw(column);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw data_error(path_ + ": row " + std::to_string(row_) + ": column '" +
                       column + "': not a number: '" + s + "'");
    return v;
  }

  std::int64_t integer(const std::string& column) const {
    const std::string& s = raw(column);
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw data_error(path_ + ": row " + std::to_string(row_) + ": column '" +
                       column + "': not an integer: '" + s + "'");
    return v;
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::map<std::string, std::size_t> columns_;
  std::vector<std::string> fields_;
  long long row_ = 0;
};

std::int64_t event_id_from_path(const std::string& path) {
  const std::string name = std::filesystem::path(path).filename().string();
  const std::size_t pos = name.find("event");
  if (pos == std::string::npos) return 0;
  std::size_t k = pos + 5;
  std::int64_t id = 0;
  bool any = false;
  while (k < name.size() && name[k] >= '0' && name[k] <= '9') {
    id = id * 10 + (name[k] - '0');
    ++k;
    any = true;
  }
  return any ? id : 0;
}

// ---------------------------------------------------------------------------
// SolveRun <-> JSON
// ---------------------------------------------------------------------------

json config_to_json(const SolveRun& run) {
  json c;
  if (const auto* sb = std::get_if<SbConfig>(&run.config)) {
    c["algorithm"] = "sb";
    c["variant"] = to_string(sb->variant);
    c["a0"] = sb->a0;
    c["dt"] = sb->dt;
    c["steps"] = sb->steps;
    if (sb->c0)
      c["c0"] = *sb->c0;
    else
      c["c0"] = nullptr;
    c["shots"] = sb->shots;
    c["seed"] = sb->seed;
    c["trace_stride"] = sb->trace_stride;
    c["threads"] = sb->threads;
  } else {
    const auto& sa = std::get<SaConfig>(run.config);
    c["algorithm"] = "sa";
    c["sweeps"] = sa.sweeps;
    if (sa.beta_range) {
      c["beta_min"] = sa.beta_range->first;
      c["beta_max"] = sa.beta_range->second;
    } else {
      c["beta_min"] = nullptr;
      c["beta_max"] = nullptr;
    }
    c["beta_schedule"] = sa.beta_schedule;
    c["shots"] = sa.shots;
    c["seed"] = sa.seed;
    c["trace_stride"] = sa.trace_stride;
    c["threads"] = sa.threads;
  }
  return c;
}

void config_from_json(const json& c, SolveRun& run) {
  const std::string algorithm = c.at("algorithm").get<std::string>();
  if (algorithm == "sb") {
    SbConfig sb;
    sb.variant = sb_variant_from_string(c.at("variant").get<std::string>());
    sb.a0 = c.at("a0").get<double>();
    sb.dt = c.at("dt").get<double>();
    sb.steps = c.at("steps").get<int>();
    if (!c.at("c0").is_null()) sb.c0 = c.at("c0").get<double>();
    sb.shots = c.at("shots").get<int>();
    sb.seed = c.at("seed").get<std::uint64_t>();
    sb.trace_stride = c.at("trace_stride").get<int>();
    sb.threads = c.at("threads").get<int>();
    run.config = sb;
  } else if (algorithm == "sa") {
    SaConfig sa;
    sa.sweeps = c.at("sweeps").get<int>();
    if (!c.at("beta_min").is_null())
      sa.beta_range = std::pair(c.at("beta_min").get<double>(),
                                c.at("beta_max").get<double>());
    sa.beta_schedule = c.at("beta_schedule").get<std::vector<double>>();
    sa.shots = c.at("shots").get<int>();
    sa.seed = c.at("seed").get<std::uint64_t>();
    sa.trace_stride = c.at("trace_stride").get<int>();
    sa.threads = c.at("threads").get<int>();
    run.config = sa;
  } else {
    throw data_error("unknown algorithm '" + algorithm + "' in solve run");
  }
}

}  // namespace

BarrelLayout BarrelLayout::trackml_default() {
  BarrelLayout layout;
  int next = 0;
  for (int layer : {2, 4, 6, 8}) layout.layer_index[{8, layer}] = next++;
  for (int layer : {2, 4, 6, 8}) layout.layer_index[{13, layer}] = next++;
  for (int layer : {2, 4}) layout.layer_index[{17, layer}] = next++;
  return layout;
}

EventBundle load_trackml_event(const std::string& hits_path,
                               const std::string& truth_path, bool barrel_only,
                               const BarrelLayout& layout) {
  EventBundle bundle;
  bundle.source = hits_path;
  bundle.event_id = event_id_from_path(hits_path);

  CsvReader hits(hits_path,
                 {"hit_id", "x", "y", "z", "volume_id", "layer_id", "module_id"});
  while (hits.next()) {
    ++bundle.rows_total;
    Hit h;
    h.hit_id = hits.integer("hit_id");
    h.x = hits.number("x");
    h.y = hits.number("y");
    h.z = hits.number("z");
    const int volume = static_cast<int>(hits.integer("volume_id"));
    const int layer = static_cast<int>(hits.integer("layer_id"));
    const auto it = layout.layer_index.find({volume, layer});
    if (it != layout.layer_index.end())
      h.layer_index = it->second;
    else if (barrel_only)
      continue;
    bundle.hits.push_back(h);
  }

  std::sort(bundle.hits.begin(), bundle.hits.end(),
            [](const Hit& a, const Hit& b) { return a.hit_id < b.hit_id; });
  for (std::size_t k = 1; k < bundle.hits.size(); ++k)
    if (bundle.hits[k - 1].hit_id == bundle.hits[k].hit_id)
      throw data_error(hits_path + ": duplicate hit_id " +
                       std::to_string(bundle.hits[k].hit_id));

  std::map<std::int64_t, std::int64_t> truth_all;
  CsvReader truth(truth_path, {"hit_id", "particle_id"});
  while (truth.next())
    truth_all[truth.integer("hit_id")] = truth.integer("particle_id");

  for (auto& h : bundle.hits) {
    const auto it = truth_all.find(h.hit_id);
    if (it == truth_all.end()) continue;
    h.particle_id = it->second;
    bundle.truth[h.hit_id] = it->second;
  }
  bundle.empty_flagged = bundle.hits.empty();
  return bundle;
}

SynthGeometry SynthGeometry::trackml_barrel() {
  SynthGeometry g;
  g.layer_radii_mm = {32.0, 72.0, 116.0, 172.0, 260.0, 360.0, 500.0, 660.0, 820.0, 1020.0};
  return g;
}

EventBundle generate_synthetic_event(int n_tracks, double noise_fraction,
                                     std::uint64_t seed,
                                     const SynthGeometry& geometry) {
  if (n_tracks < 1) throw std::invalid_argument("n_tracks must be positive");
  if (!(noise_fraction >= 0.0) || !std::isfinite(noise_fraction))
    throw std::invalid_argument("noise_fraction must be non-negative");
  if (geometry.layer_radii_mm.empty())
    throw std::invalid_argument("geometry needs at least one layer");
  for (std::size_t k = 0; k < geometry.layer_radii_mm.size(); ++k) {
    if (!(geometry.layer_radii_mm[k] > 0.0))
      throw std::invalid_argument("layer radii must be positive");
    if (k > 0 && !(geometry.layer_radii_mm[k] > geometry.layer_radii_mm[k - 1]))
      throw std::invalid_argument("layer radii must increase");
  }

  ShotRng rng(seed, 0);
  EventBundle bundle;
  bundle.source = "synthetic";
  std::int64_t next_hit = 1;

  for (int t = 0; t < n_tracks; ++t) {
    TruthParticle p;
    p.id = t + 1;
    // Stiff tracks: the curvature cut admits only |q/pT| <= 8e-4, so the
    // sampling floor sits above 1/8e-4 = 1250.
    const double pt = rng.uniform(1500.0, 10000.0);
    const double eta = rng.uniform(-0.5, 0.5);
    const double q = rng.uniform_int(2) ? 1.0 : -1.0;
    p.phi0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double u1 = 1.0 - rng.uniform(0.0, 1.0);  // (0, 1] for the log
    const double u2 = rng.uniform(0.0, 1.0);
    p.d0 = 0.05 * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
    p.z0 = rng.uniform(-30.0, 30.0);
    p.theta = 2.0 * std::atan(std::exp(-eta));
    p.qpt = q / pt;

    const double radius = pt / (0.3 * geometry.b_field_t) * 1000.0;  // mm
    const double cot_theta = std::sinh(eta);
    const double sin0 = std::sin(p.phi0), cos0 = std::cos(p.phi0);
    // Perigee sits on the left normal of the momentum; the center is offset
    // by q*R along the right normal (a positive charge turns clockwise in
    // a +z field).
    const double p0x = -p.d0 * sin0, p0y = p.d0 * cos0;
    const double cx = p0x + q * radius * sin0;
    const double cy = p0y - q * radius * cos0;
    const double center_dist = std::hypot(cx, cy);

    for (std::size_t layer = 0; layer < geometry.layer_radii_mm.size(); ++layer) {
      const double rl = geometry.layer_radii_mm[layer];
      if (rl > center_dist + radius || rl < std::abs(center_dist - radius))
        continue;  // layer cylinder never crossed
      // Intersection of the layer cylinder with the track circle.
      const double along = (rl * rl + center_dist * center_dist - radius * radius) /
                           (2.0 * center_dist);
      const double perp = std::sqrt(std::max(0.0, rl * rl - along * along));
      const double ex = cx / center_dist, ey = cy / center_dist;
      double first_s = std::numeric_limits<double>::infinity();
      double hx = 0.0, hy = 0.0;
      for (double side : {1.0, -1.0}) {
        const double ix = along * ex - side * perp * ey;
        const double iy = along * ey + side * perp * ex;
        // Arc length from the perigee, measured along the motion.
        const double vx = ix - cx, vy = iy - cy;
        const double ux = p0x - cx, uy = p0y - cy;
        double ang = std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
        if (q > 0) ang = -ang;  // clockwise motion
        if (ang < 0) ang += 2.0 * std::numbers::pi;
        const double s = radius * ang;
        if (s < first_s) {
          first_s = s;
          hx = ix;
          hy = iy;
        }
      }
      const double z = p.z0 + first_s * cot_theta;
      if (std::abs(z) > geometry.half_length_mm) continue;  // exits the barrel
      Hit h;
      h.hit_id = next_hit++;
      h.x = hx;
      h.y = hy;
      h.z = z;
      h.layer_index = static_cast<int>(layer);
      h.particle_id = p.id;
      bundle.hits.push_back(h);
      bundle.truth[h.hit_id] = p.id;
    }
    bundle.particles.push_back(p);
  }

  const long long n_noise =
      std::llround(noise_fraction * static_cast<double>(bundle.hits.size()));
  const int n_layers = static_cast<int>(geometry.layer_radii_mm.size());
  for (long long k = 0; k < n_noise; ++k) {
    const int layer = rng.uniform_int(n_layers);
    const double rl = geometry.layer_radii_mm[layer];
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Hit h;
    h.hit_id = next_hit++;
    h.x = rl * std::cos(phi);
    h.y = rl * std::sin(phi);
    h.z = rng.uniform(-geometry.half_length_mm, geometry.half_length_mm);
    h.layer_index = layer;
    h.particle_id = 0;
    bundle.hits.push_back(h);
    bundle.truth[h.hit_id] = 0;
  }
  bundle.rows_total = static_cast<long long>(bundle.hits.size());
  bundle.empty_flagged = bundle.hits.empty();
  return bundle;
}

void write_trackml_event(const EventBundle& event, const std::string& hits_path,
                         const std::string& truth_path, const BarrelLayout& layout) {
  std::map<int, std::pair<int, int>> inverse;
  for (const auto& [key, idx] : layout.layer_index) inverse[idx] = key;

  std::ostringstream hits;
  hits << "hit_id,x,y,z,volume_id,layer_id,module_id\n";
  for (const auto& h : event.hits) {
    int volume = 0, layer = 0;
    const auto it = inverse.find(h.layer_index);
    if (it != inverse.end()) {
      volume = it->second.first;
      layer = it->second.second;
    }
    hits << h.hit_id << ',' << fmt_double(h.x) << ',' << fmt_double(h.y) << ','
         << fmt_double(h.z) << ',' << volume << ',' << layer << ",1\n";
  }
  atomic_write(hits_path, hits.str());

  std::ostringstream truth;
  truth << "hit_id,particle_id\n";
  for (const auto& h : event.hits) {
    const auto it = event.truth.find(h.hit_id);
    truth << h.hit_id << ',' << (it == event.truth.end() ? 0 : it->second) << '\n';
  }
  atomic_write(truth_path, truth.str());
}

void save_qubo(const QuboProblem& p, const std::string& path,
               const std::map<std::string, std::string>& meta) {
  json doc;
  doc["n"] = p.n();
  doc["bias"] = p.bias();
  json pairs = json::array();
  for (const auto& pt : p.pairs()) pairs.push_back({pt.i, pt.j, pt.w});
  doc["pairs"] = std::move(pairs);
  doc["meta"] = meta;
  atomic_write(path, doc.dump(2) + "\n");
}

QuboProblem load_qubo(const std::string& path) {
  try {
    const json doc = json::parse(read_file(path));
    const int n = doc.at("n").get<int>();
    auto bias = doc.at("bias").get<std::vector<double>>();
    std::vector<PairTerm> pairs;
    for (const auto& entry : doc.at("pairs")) {
      if (!entry.is_array() || entry.size() != 3)
        throw data_error(path + ": pair entries must be [i, j, w] triples");
      pairs.push_back({entry[0].get<int>(), entry[1].get<int>(), entry[2].get<double>()});
    }
    return QuboProblem(n, std::move(bias), std::move(pairs));
  } catch (const json::exception& e) {
    throw data_error(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw data_error(path + ": " + e.what());
  }
}

void save_index_map(const QuboBuild& build, const std::string& path) {
  json doc;
  json vars = json::array();
  for (const auto& t : build.variables) vars.push_back({t.hits[0], t.hits[1], t.hits[2]});
  doc["variables"] = std::move(vars);
  atomic_write(path, doc.dump(2) + "\n");
}

std::vector<std::array<std::int64_t, 3>> load_index_map(const std::string& path) {
  try {
    const json doc = json::parse(read_file(path));
    std::vector<std::array<std::int64_t, 3>> out;
    for (const auto& entry : doc.at("variables")) {
      if (!entry.is_array() || entry.size() != 3)
        throw data_error(path + ": variables must be hit-id triples");
      out.push_back({entry[0].get<std::int64_t>(), entry[1].get<std::int64_t>(),
                     entry[2].get<std::int64_t>()});
    }
    return out;
  } catch (const json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
}

std::string solve_run_to_json(const SolveRun& run) {
  json doc;
  doc["config"] = config_to_json(run);
  json shots = json::array();
  for (const auto& shot : run.shots) {
    json s;
    std::vector<int> bits(shot.spins.spins.size());
    for (std::size_t k = 0; k < bits.size(); ++k)
      bits[k] = shot.spins.spins[k] > 0 ? 1 : 0;
    s["spins"] = std::move(bits);
    s["energy"] = shot.energy;
    s["flagged"] = shot.flagged;
    json trace = json::array();
    for (const auto& row : shot.trace)
      trace.push_back({row.elapsed_seconds, row.step, row.best_energy});
    s["trace"] = std::move(trace);
    json first_hit = json::array();
    for (const auto& [threshold, t] : shot.first_hit)
      first_hit.push_back({threshold, t});
    s["first_hit"] = std::move(first_hit);
    shots.push_back(std::move(s));
  }
  doc["shots"] = std::move(shots);
  doc["best_index"] = run.best_index;
  doc["wall_clock_seconds"] = run.wall_clock_seconds;
  return doc.dump(2) + "\n";
}

void save_solve_run(const SolveRun& run, const std::string& path) {
  atomic_write(path, solve_run_to_json(run));
}

SolveRun load_solve_run(const std::string& path) {
  try {
    const json doc = json::parse(read_file(path));
    SolveRun run;
    config_from_json(doc.at("config"), run);
    for (const auto& s : doc.at("shots")) {
      ShotResult shot;
      for (const int bit : s.at("spins")) {
        if (bit != 0 && bit != 1)
          throw data_error(path + ": spins must be 0/1");
        shot.spins.spins.push_back(bit ? 1 : -1);
      }
      shot.energy = s.at("energy").get<double>();
      shot.flagged = s.at("flagged").get<bool>();
      for (const auto& row : s.at("trace")) {
        if (!row.is_array() || row.size() != 3)
          throw data_error(path + ": trace rows must be triples");
        shot.trace.push_back(
            {row[0].get<double>(), row[1].get<long>(), row[2].get<double>()});
      }
      for (const auto& entry : s.at("first_hit"))
        shot.first_hit[entry.at(0).get<double>()] = entry.at(1).get<double>();
      run.shots.push_back(std::move(shot));
    }
    run.best_index = doc.at("best_index").get<int>();
    run.wall_clock_seconds = doc.at("wall_clock_seconds").get<double>();
    return run;
  } catch (const json::exception& e) {
    throw data_error(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw data_error(path + ": " + e.what());
  }
}

void save_trace_csv(const SolveRun& run, const std::string& path) {
  std::ostringstream out;
  out << "shot,step,elapsed_seconds,best_energy\n";
  for (std::size_t s = 0; s < run.shots.size(); ++s)
    for (const auto& row : run.shots[s].trace)
      out << s << ',' << row.step << ',' << fmt_double(row.elapsed_seconds) << ','
          << fmt_double(row.best_energy) << '\n';
  atomic_write(path, out.str());
}

void save_eval_report(const EvalReport& report, const std::string& path) {
  json doc;
  doc["tp"] = report.total.tp;
  doc["fp"] = report.total.fp;
  doc["fn"] = report.total.fn;
  doc["efficiency"] = report.efficiency_defined ? json(report.efficiency) : json(nullptr);
  doc["purity"] = report.purity_defined ? json(report.purity) : json(nullptr);
  json events = json::array();
  for (const auto& [label, counts] : report.per_event)
    events.push_back(
        {{"label", label}, {"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}});
  doc["per_event"] = std::move(events);
  atomic_write(path, doc.dump(2) + "\n");
}

void save_ttt_report(const TttReport& report, const std::string& path) {
  json doc;
  doc["target_energy"] = report.target_energy;
  doc["confidence"] = report.confidence;
  doc["ttt_seconds"] = report.ttt_seconds ? json(*report.ttt_seconds) : json(nullptr);
  json first_hits = json::array();
  for (const auto& t : report.first_hit_seconds)
    first_hits.push_back(t ? json(*t) : json(nullptr));
  doc["first_hit_seconds"] = std::move(first_hits);
  doc["success_fraction"] = report.success_fraction;
  atomic_write(path, doc.dump(2) + "\n");
}

}  // namespace bft
