#include "doctest.h"

#include "bft/event_io.hpp"
#include "bft/tracking.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

using namespace bft;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "bft_io_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_of(const std::string& name) { return (scratch() / name).string(); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("qubo files round trip exactly") {
  SUBCASE("empty problem") {
    const std::string p = path_of("qubo_empty.json");
    save_qubo(QuboProblem(0, {}, {}), p);
    const QuboProblem back = load_qubo(p);
    CHECK(back.n() == 0);
    CHECK(back.bias().empty());
    CHECK(back.pairs().empty());
  }
  SUBCASE("random sparse problem with awkward doubles") {
    ShotRng rng(8, 0);
    const int n = 100;
    std::vector<double> bias(n);
    for (auto& b : bias) b = rng.uniform(-3.0, 3.0);
    std::vector<PairTerm> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform(0.0, 1.0) < 0.02) pairs.push_back({i, j, rng.uniform(-1.0, 1.0)});
    const QuboProblem q(n, bias, pairs);
    const std::string p = path_of("qubo_random.json");
    save_qubo(q, p, {{"source", "unit"}});
    const QuboProblem back = load_qubo(p);
    CHECK(back.n() == q.n());
    CHECK(back.bias() == q.bias());  // bit-exact through shortest-round-trip
    REQUIRE(back.pairs().size() == q.pairs().size());
    for (std::size_t k = 0; k < q.pairs().size(); ++k) {
      CHECK(back.pairs()[k].i == q.pairs()[k].i);
      CHECK(back.pairs()[k].j == q.pairs()[k].j);
      CHECK(back.pairs()[k].w == q.pairs()[k].w);
    }
    const auto doc = nlohmann::json::parse(read_file(p));
    CHECK(doc.at("meta").at("source") == "unit");
  }
}

TEST_CASE("qubo loading rejects malformed files") {
  CHECK_THROWS_AS(load_qubo(path_of("missing.json")), data_error);

  const std::string bad = path_of("bad.json");
  write_file(bad, "{ not json");
  CHECK_THROWS_WITH_AS(load_qubo(bad), doctest::Contains(bad.c_str()), data_error);

  const std::string out_of_range = path_of("oor.json");
  write_file(out_of_range,
             R"({"n": 2, "bias": [0, 0], "pairs": [[0, 5, 1.0]], "meta": {}})");
  CHECK_THROWS_AS(load_qubo(out_of_range), data_error);

  const std::string short_pair = path_of("short_pair.json");
  write_file(short_pair, R"({"n": 2, "bias": [0, 0], "pairs": [[0, 1]], "meta": {}})");
  CHECK_THROWS_WITH_AS(load_qubo(short_pair), doctest::Contains("triples"), data_error);
}

TEST_CASE("index map round trips") {
  QuboBuild build;
  Triplet t1, t2;
  t1.hits = {4, 7, 11};
  t2.hits = {7, 11, 19};
  build.variables = {t1, t2};
  build.problem = QuboProblem(2, {0, 0}, {});
  const std::string p = path_of("index_map.json");
  save_index_map(build, p);
  const auto vars = load_index_map(p);
  REQUIRE(vars.size() == 2);
  CHECK(vars[0] == std::array<std::int64_t, 3>{4, 7, 11});
  CHECK(vars[1] == std::array<std::int64_t, 3>{7, 11, 19});
}

TEST_CASE("solve runs round trip through json") {
  SolveRun run;
  SbConfig cfg;
  cfg.variant = SbVariant::discrete;
  cfg.a0 = 1.25;
  cfg.dt = 0.75;
  cfg.steps = 42;
  cfg.c0 = 0.03125;
  cfg.shots = 2;
  cfg.seed = 987654321012345ull;
  cfg.trace_stride = 7;
  cfg.threads = 3;
  run.config = cfg;

  ShotResult a;
  a.spins.spins = {1, -1, 1};
  a.energy = -0.12345678901234567;
  a.trace = {{0.0, 0, 1.0}, {0.25, 7, -0.12345678901234567}};
  a.first_hit = {{-0.1, 0.25}, {0.5, 0.0}};
  ShotResult b;
  b.spins.spins = {-1, -1, -1};
  b.energy = 3.0;
  b.flagged = true;
  b.trace = {{0.0, 0, 3.0}};
  run.shots = {a, b};
  run.best_index = 0;
  run.wall_clock_seconds = 1.5;

  const std::string p = path_of("run_sb.json");
  save_solve_run(run, p);
  CHECK(read_file(p) == solve_run_to_json(run));

  const SolveRun back = load_solve_run(p);
  const auto& c = std::get<SbConfig>(back.config);
  CHECK(c.variant == SbVariant::discrete);
  CHECK(c.a0 == 1.25);
  CHECK(c.dt == 0.75);
  CHECK(c.steps == 42);
  CHECK(c.c0 == 0.03125);
  CHECK(c.shots == 2);
  CHECK(c.seed == 987654321012345ull);
  CHECK(c.trace_stride == 7);
  CHECK(c.threads == 3);
  REQUIRE(back.shots.size() == 2);
  CHECK(back.shots[0].spins.spins == a.spins.spins);
  CHECK(back.shots[0].energy == a.energy);
  CHECK(!back.shots[0].flagged);
  REQUIRE(back.shots[0].trace.size() == 2);
  CHECK(back.shots[0].trace[1].elapsed_seconds == 0.25);
  CHECK(back.shots[0].trace[1].step == 7);
  CHECK(back.shots[0].trace[1].best_energy == a.energy);
  CHECK(back.shots[0].first_hit == a.first_hit);
  CHECK(back.shots[1].flagged);
  CHECK(back.best_index == 0);
  CHECK(back.wall_clock_seconds == 1.5);

  SUBCASE("unset c0 survives as null") {
    SolveRun bare = run;
    SbConfig c2 = cfg;
    c2.c0.reset();
    bare.config = c2;
    const std::string p2 = path_of("run_sb_null.json");
    save_solve_run(bare, p2);
    CHECK(!std::get<SbConfig>(load_solve_run(p2).config).c0.has_value());
  }

  SUBCASE("sa config round trips too") {
    SolveRun sarun = run;
    SaConfig sa;
    sa.sweeps = 12;
    sa.beta_range = std::pair(0.125, 8.0);
    sa.beta_schedule = {0.5, 1.0, 2.0};
    sa.shots = 2;
    sa.seed = 5;
    sa.trace_stride = 2;
    sa.threads = 1;
    sarun.config = sa;
    const std::string p3 = path_of("run_sa.json");
    save_solve_run(sarun, p3);
    const SolveRun back = load_solve_run(p3);
    const auto& sc = std::get<SaConfig>(back.config);
    CHECK(sc.sweeps == 12);
    REQUIRE(sc.beta_range.has_value());
    CHECK(sc.beta_range->first == 0.125);
    CHECK(sc.beta_range->second == 8.0);
    CHECK(sc.beta_schedule == std::vector<double>{0.5, 1.0, 2.0});
  }
}

TEST_CASE("trace csv export") {
  SolveRun run;
  run.config = SbConfig{};
  ShotResult s0;
  s0.trace = {{0.0, 0, 1.5}, {0.5, 10, -2.25}};
  ShotResult s1;
  s1.trace = {{0.0, 0, 0.5}};
  run.shots = {s0, s1};
  const std::string p = path_of("trace.csv");
  save_trace_csv(run, p);
  CHECK(read_file(p) ==
        "shot,step,elapsed_seconds,best_energy\n"
        "0,0,0,1.5\n"
        "0,10,0.5,-2.25\n"
        "1,0,0,0.5\n");
}

TEST_CASE("report writers emit null for undefined values") {
  EvalReport rep;
  rep.total = {3, 1, 2};
  rep.efficiency = 0.6;
  rep.efficiency_defined = true;
  rep.purity_defined = false;
  rep.per_event.push_back({"evt9", {3, 1, 2}});
  const std::string p = path_of("eval.json");
  save_eval_report(rep, p);
  auto doc = nlohmann::json::parse(read_file(p));
  CHECK(doc.at("tp") == 3);
  CHECK(doc.at("fp") == 1);
  CHECK(doc.at("fn") == 2);
  CHECK(doc.at("efficiency").get<double>() == 0.6);
  CHECK(doc.at("purity").is_null());
  CHECK(doc.at("per_event")[0].at("label") == "evt9");

  TttReport ttt;
  ttt.target_energy = -4.0;
  ttt.confidence = 0.99;
  ttt.first_hit_seconds = {std::optional<double>(0.5), std::nullopt};
  ttt.success_fraction = 0.5;
  const std::string q = path_of("ttt.json");
  save_ttt_report(ttt, q);
  auto tdoc = nlohmann::json::parse(read_file(q));
  CHECK(tdoc.at("ttt_seconds").is_null());
  CHECK(tdoc.at("first_hit_seconds")[0].get<double>() == 0.5);
  CHECK(tdoc.at("first_hit_seconds")[1].is_null());
  CHECK(tdoc.at("success_fraction").get<double>() == 0.5);
}

TEST_CASE("trackml events load with barrel mapping") {
  const std::string hits = path_of("event000000123-hits.csv");
  const std::string truth = path_of("event000000123-truth.csv");
  write_file(hits,
             "hit_id,x,y,z,volume_id,layer_id,module_id\n"
             "2,-72.0,0.5,10,13,2,3\n"
             "1,32.0,0,5,8,2,7\n"
             "3,1,2,3,9,2,1\n");
  write_file(truth,
             "hit_id,particle_id\n"
             "1,100\n"
             "2,100\n"
             "3,0\n");

  const EventBundle barrel = load_trackml_event(hits, truth, true);
  CHECK(barrel.event_id == 123);
  CHECK(barrel.rows_total == 3);
  REQUIRE(barrel.hits.size() == 2);  // volume 9 is not in the barrel layout
  CHECK(barrel.hits[0].hit_id == 1);  // sorted by id
  CHECK(barrel.hits[0].layer_index == 0);
  CHECK(barrel.hits[0].particle_id == 100);
  CHECK(barrel.hits[1].hit_id == 2);
  CHECK(barrel.hits[1].layer_index == 4);
  CHECK(barrel.truth.at(1) == 100);
  CHECK(!barrel.empty_flagged);

  const EventBundle all = load_trackml_event(hits, truth, false);
  REQUIRE(all.hits.size() == 3);
  CHECK(all.hits[2].hit_id == 3);
  CHECK(all.hits[2].layer_index == -1);
}

TEST_CASE("trackml loader failure modes") {
  const std::string truth = path_of("t-truth.csv");
  write_file(truth, "hit_id,particle_id\n1,100\n");

  SUBCASE("textual coordinate names the row and column") {
    const std::string hits = path_of("t1-hits.csv");
    write_file(hits,
               "hit_id,x,y,z,volume_id,layer_id,module_id\n"
               "1,abc,0,5,8,2,7\n");
    try {
      load_trackml_event(hits, truth, true);
      FAIL("expected data_error");
    } catch (const data_error& e) {
      CHECK(contains(e.what(), hits));
      CHECK(contains(e.what(), "row 1"));
      CHECK(contains(e.what(), "column 'x'"));
      CHECK(contains(e.what(), "abc"));
    }
  }
  SUBCASE("missing column") {
    const std::string hits = path_of("t2-hits.csv");
    write_file(hits, "hit_id,x,y,volume_id,layer_id,module_id\n1,0,0,8,2,7\n");
    CHECK_THROWS_WITH_AS(load_trackml_event(hits, truth, true),
                         doctest::Contains("missing column 'z'"), data_error);
  }
  SUBCASE("empty file") {
    const std::string hits = path_of("t3-hits.csv");
    write_file(hits, "");
    CHECK_THROWS_WITH_AS(load_trackml_event(hits, truth, true),
                         doctest::Contains("empty"), data_error);
  }
  SUBCASE("duplicate hit id") {
    const std::string hits = path_of("t4-hits.csv");
    write_file(hits,
               "hit_id,x,y,z,volume_id,layer_id,module_id\n"
               "1,32,0,5,8,2,7\n"
               "1,33,0,5,8,2,8\n");
    CHECK_THROWS_WITH_AS(load_trackml_event(hits, truth, true),
                         doctest::Contains("duplicate"), data_error);
  }
  SUBCASE("endcap-only input is flagged empty") {
    const std::string hits = path_of("t5-hits.csv");
    write_file(hits,
               "hit_id,x,y,z,volume_id,layer_id,module_id\n"
               "1,32,0,5,7,2,7\n");
    const EventBundle e = load_trackml_event(hits, truth, true);
    CHECK(e.hits.empty());
    CHECK(e.empty_flagged);
  }
}

TEST_CASE("synthetic events are deterministic and complete") {
  const EventBundle a = generate_synthetic_event(4, 0.25, 99);
  const EventBundle b = generate_synthetic_event(4, 0.25, 99);
  REQUIRE(a.hits.size() == b.hits.size());
  for (std::size_t k = 0; k < a.hits.size(); ++k) {
    CHECK(a.hits[k].hit_id == b.hits[k].hit_id);
    CHECK(a.hits[k].x == b.hits[k].x);
    CHECK(a.hits[k].y == b.hits[k].y);
    CHECK(a.hits[k].z == b.hits[k].z);
    CHECK(a.hits[k].layer_index == b.hits[k].layer_index);
    CHECK(a.hits[k].particle_id == b.hits[k].particle_id);
  }
  const EventBundle c = generate_synthetic_event(4, 0.25, 100);
  bool any_differs = c.hits.size() != a.hits.size();
  for (std::size_t k = 0; !any_differs && k < a.hits.size(); ++k)
    any_differs = a.hits[k].x != c.hits[k].x;
  CHECK(any_differs);

  // 4 tracks over 10 layers plus 25% noise.
  CHECK(a.particles.size() == 4);
  CHECK(a.hits.size() == 40 + 10);
  CHECK(a.source == "synthetic");
  int noise = 0;
  for (const auto& h : a.hits) {
    CHECK(a.truth.count(h.hit_id) == 1);
    CHECK(a.truth.at(h.hit_id) == h.particle_id);
    if (h.particle_id == 0) ++noise;
  }
  CHECK(noise == 10);

  const SynthGeometry geo = SynthGeometry::trackml_barrel();
  for (const auto& h : a.hits) {
    REQUIRE(h.layer_index >= 0);
    REQUIRE(h.layer_index < static_cast<int>(geo.layer_radii_mm.size()));
    CHECK(h.r() == doctest::Approx(geo.layer_radii_mm[h.layer_index]).epsilon(1e-9));
    CHECK(std::abs(h.z) <= geo.half_length_mm);
  }

  CHECK_THROWS_AS(generate_synthetic_event(0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic_event(1, -0.5, 1), std::invalid_argument);
}

TEST_CASE("generator truth matches triplet kinematics") {
  const EventBundle event = generate_synthetic_event(5, 0.0, 321);
  TrackingConfig cfg;
  std::map<std::int64_t, const TruthParticle*> by_id;
  for (const auto& p : event.particles) by_id[p.id] = &p;
  std::map<std::int64_t, std::vector<const Hit*>> tracks;
  for (const auto& h : event.hits) tracks[h.particle_id].push_back(&h);

  for (auto& [pid, hits] : tracks) {
    const TruthParticle& tp = *by_id.at(pid);
    REQUIRE(hits.size() == 10);
    std::sort(hits.begin(), hits.end(),
              [](const Hit* a, const Hit* b) { return a->layer_index < b->layer_index; });
    for (std::size_t k = 0; k + 2 < hits.size(); ++k) {
      const auto kin = triplet_kinematics(*hits[k], *hits[k + 1], *hits[k + 2], cfg);
      CHECK(kin.qpt == doctest::Approx(tp.qpt).epsilon(1e-6));
      CHECK(std::abs(kin.d0 - std::abs(tp.d0)) <= 1e-6);
      CHECK(std::abs(kin.z0 - tp.z0) <= 1e-6);
      CHECK(kin.theta == doctest::Approx(tp.theta).epsilon(1e-6));
      CHECK(kin.holes == 0);
    }
  }
}

TEST_CASE("trackml writer round trips a synthetic event") {
  const EventBundle event = generate_synthetic_event(3, 0.2, 11);
  const std::string hits = path_of("event000000007-hits.csv");
  const std::string truth = path_of("event000000007-truth.csv");
  write_trackml_event(event, hits, truth);
  const EventBundle back = load_trackml_event(hits, truth, true);
  REQUIRE(back.hits.size() == event.hits.size());
  for (std::size_t k = 0; k < event.hits.size(); ++k) {
    CHECK(back.hits[k].hit_id == event.hits[k].hit_id);
    CHECK(back.hits[k].x == event.hits[k].x);  // exact shortest-round-trip
    CHECK(back.hits[k].y == event.hits[k].y);
    CHECK(back.hits[k].z == event.hits[k].z);
    CHECK(back.hits[k].layer_index == event.hits[k].layer_index);
    CHECK(back.hits[k].particle_id == event.hits[k].particle_id);
  }
  CHECK(back.event_id == 7);
}
