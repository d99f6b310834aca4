#include "doctest.h"

#include "bft/event_io.hpp"
#include "bft/ising.hpp"
#include "bft/qubo.hpp"
#include "bft/solvers.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

// Exercises the installed binary through a shell, so these tests cover the
// argument wiring and exit-code contract rather than the numerics (the unit
// suites own those).

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kBin = BFT_CLI_BIN;

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "bft_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string p(const std::string& name) { return (scratch() / name).string(); }

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + kBin + " " + args +
                          " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Blanks every wall-clock field so reruns can be compared bit for bit.
json normalized(const std::string& path) {
  json doc = json::parse(slurp(path));
  doc["wall_clock_seconds"] = 0.0;
  for (auto& shot : doc.at("shots")) {
    for (auto& row : shot.at("trace")) row[0] = 0.0;
    for (auto& entry : shot.at("first_hit")) entry[1] = 0.0;
  }
  return doc;
}

}  // namespace

TEST_CASE("cli: usage errors exit 1") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("solve --qubo x.json").code == 1);  // --out missing
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("solve --help").code == 0);
}

TEST_CASE("cli: unknown solver exits 1 before touching files") {
  const auto r = run_cli("solve --qubo " + p("never_written.json") +
                         " --solver qpu --out " + p("r.json"));
  CHECK(r.code == 1);
  CHECK_FALSE(fs::exists(p("r.json")));
}

TEST_CASE("cli: missing input exits 2") {
  const auto r = run_cli("solve --qubo " + p("absent.json") + " --out " + p("r.json"));
  CHECK(r.code == 2);
  CHECK(contains(r.err, "absent.json"));

  const auto b = run_cli("build-qubo --hits " + p("absent_hits.csv") + " --truth " +
                         p("absent_truth.csv") + " --out " + p("q.json"));
  CHECK(b.code == 2);
}

TEST_CASE("cli: malformed qubo exits 2") {
  write_file(p("broken.json"), "{ not json");
  const auto r = run_cli("solve --qubo " + p("broken.json") + " --out " + p("r.json"));
  CHECK(r.code == 2);
}

TEST_CASE("cli: solve finds the brute-force minimum and reruns identically") {
  bft::ShotRng rng(412, 0);
  const int n = 8;
  std::vector<double> bias(n);
  std::vector<bft::PairTerm> pairs;
  for (int i = 0; i < n; ++i) bias[i] = rng.uniform(-2.0, 2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      pairs.push_back({i, j, rng.uniform(-2.0, 2.0)});
  const bft::QuboProblem qubo(n, bias, pairs);
  bft::save_qubo(qubo, p("q8.json"));
  const double ground = bft::brute_force_minimum(qubo).second;

  const std::string args = "solve --qubo " + p("q8.json") +
                           " --solver bsb --shots 40 --steps 2000 --seed 7 --out ";
  const auto r1 = run_cli(args + p("run_a.json"));
  REQUIRE(r1.code == 0);
  CHECK(contains(r1.out, "best_energy "));
  CHECK(contains(r1.err, "config:"));

  const json doc = json::parse(slurp(p("run_a.json")));
  const int best = doc.at("best_index").get<int>();
  REQUIRE(best >= 0);
  const double e = doc.at("shots")[best].at("energy").get<double>();
  CHECK(e == doctest::Approx(ground).epsilon(1e-9));

  const auto r2 = run_cli(args + p("run_b.json"));
  REQUIRE(r2.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(normalized(p("run_a.json")) == normalized(p("run_b.json")));
}

TEST_CASE("cli: every-shot overflow exits 3 but still writes the run") {
  bft::save_qubo(bft::QuboProblem(2, {1.0, -1.0}, {{0, 1, 4.0}}), p("qovf.json"));
  const auto r = run_cli("solve --qubo " + p("qovf.json") +
                         " --solver asb --c0 1e150 --shots 4 --steps 50 --out " +
                         p("rovf.json"));
  CHECK(r.code == 3);
  CHECK(contains(r.err, "overflow"));
  const json doc = json::parse(slurp(p("rovf.json")));
  CHECK(doc.at("best_index").get<int>() == -1);
  for (const auto& shot : doc.at("shots")) CHECK(shot.at("flagged").get<bool>());
}

TEST_CASE("cli: config file sets values, flags win") {
  bft::save_qubo(bft::QuboProblem(2, {1.0, -1.0}, {{0, 1, 4.0}}), p("qc.json"));
  write_file(p("solver.ini"), "shots=3\nseed=9\nsteps=60\n");
  const auto r = run_cli("solve --qubo " + p("qc.json") + " --config " +
                         p("solver.ini") + " --shots 2 --out " + p("rc.json"));
  REQUIRE(r.code == 0);
  const json cfg = json::parse(slurp(p("rc.json"))).at("config");
  CHECK(cfg.at("shots").get<int>() == 2);   // flag beats file
  CHECK(cfg.at("seed").get<int>() == 9);    // file beats default
  CHECK(cfg.at("steps").get<int>() == 60);
}

TEST_CASE("cli: BIFURCTRACK_THREADS feeds --threads") {
  bft::save_qubo(bft::QuboProblem(2, {1.0, -1.0}, {{0, 1, 4.0}}), p("qt.json"));
  const std::string args =
      "solve --qubo " + p("qt.json") + " --shots 2 --steps 40 --out " + p("rt.json");
  auto r = run_cli(args, "BIFURCTRACK_THREADS=2");
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(p("rt.json"))).at("config").at("threads").get<int>() == 2);

  r = run_cli(args + " --threads 1", "BIFURCTRACK_THREADS=2");
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(p("rt.json"))).at("config").at("threads").get<int>() == 1);
}

TEST_CASE("cli: synthetic pipeline end to end") {
  auto r = run_cli("synth --tracks 5 --seed 21 --hits " + p("hits.csv") +
                   " --truth " + p("truth.csv"));
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "hits 50"));

  r = run_cli("build-qubo --hits " + p("hits.csv") + " --truth " + p("truth.csv") +
              " --out " + p("ev.json"));
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "variables "));
  CHECK(contains(r.out, "pairs "));
  CHECK(fs::exists(p("ev.map.json")));  // sidecar default next to --out

  r = run_cli("solve --qubo " + p("ev.json") +
              " --solver bsb --shots 20 --steps 1000 --seed 3 --trace " +
              p("ev_trace.csv") + " --out " + p("ev_run.json"));
  REQUIRE(r.code == 0);
  CHECK(contains(slurp(p("ev_trace.csv")), "shot,step,elapsed_seconds,best_energy"));

  r = run_cli("evaluate --result " + p("ev_run.json") + " --qubo-map " +
              p("ev.map.json") + " --hits " + p("hits.csv") + " --truth " +
              p("truth.csv") + " --out " + p("ev_report.json"));
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "efficiency "));
  CHECK(contains(r.out, "purity "));
  const json rep = json::parse(slurp(p("ev_report.json")));
  CHECK(rep.at("tp").get<int>() > 0);
}

TEST_CASE("cli: evaluate rejects a result that does not match the map") {
  // Two-variable run against a three-variable map.
  bft::IsingProblem tiny(2, {{0, 1, 1.0}}, {0.0, 0.0}, 0.0);
  bft::SbConfig cfg;
  cfg.shots = 1;
  cfg.steps = 20;
  bft::save_solve_run(bft::solve_bsb(tiny, cfg), p("mm_run.json"));
  write_file(p("mm.map.json"),
             "{\"variables\": [[1,2,3],[2,3,4],[3,4,5]]}\n");
  bft::save_qubo(bft::QuboProblem(3, {0, 0, 0}, {{0, 1, -1.0}}), p("mm.json"));
  auto r = run_cli("evaluate --result " + p("mm_run.json") + " --qubo-map " +
                   p("mm.map.json") + " --hits " + p("hits.csv") + " --truth " +
                   p("truth.csv") + " --out " + p("mm_report.json"));
  CHECK(r.code == 2);
  CHECK(contains(r.err, "does not match"));
}

TEST_CASE("cli: build-qubo on an eventless input still succeeds") {
  // Endcap-only rows: barrel filtering leaves nothing.
  write_file(p("empty_hits.csv"),
             "hit_id,x,y,z,volume_id,layer_id,module_id\n"
             "1,30.0,0.0,900.0,7,2,1\n");
  write_file(p("empty_truth.csv"), "hit_id,particle_id\n1,5\n");
  const auto r = run_cli("build-qubo --hits " + p("empty_hits.csv") + " --truth " +
                         p("empty_truth.csv") + " --out " + p("empty_q.json"));
  CHECK(r.code == 0);
  CHECK(contains(r.err, "warning"));
  CHECK(contains(r.out, "variables 0"));
  CHECK(bft::load_qubo(p("empty_q.json")).n() == 0);
}

TEST_CASE("cli: benchmark writes the comparison table") {
  bft::ShotRng rng(997, 0);
  const int n = 6;
  std::vector<double> bias(n);
  std::vector<bft::PairTerm> pairs;
  for (int i = 0; i < n; ++i) bias[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      pairs.push_back({i, j, rng.uniform(-1.0, 1.0)});
  bft::save_qubo(bft::QuboProblem(n, bias, pairs), p("qb.json"),
                 {{"particles", "4"}});

  auto r = run_cli("benchmark --qubo " + p("qb.json") +
                   " --solvers bsb,sa --shots 10 --steps 200 --seed 2 --out " +
                   p("bench.csv"));
  REQUIRE(r.code == 0);
  const std::string csv = slurp(p("bench.csv"));
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "particles,qubo_size,solver,ttt_seconds");
  std::getline(lines, line);
  CHECK(contains(line, "4,6,bsb,"));
  std::getline(lines, line);
  CHECK(contains(line, "4,6,sa,"));

  // An over-unity fraction of a negative best energy is unreachable, so the
  // table marks every solver as never hitting the target. The single-bias
  // problem pins the best at exactly -1.
  bft::save_qubo(bft::QuboProblem(1, {-1.0}, {}), p("qneg.json"));
  r = run_cli("benchmark --qubo " + p("qneg.json") +
              " --solvers bsb --shots 5 --steps 100 --target-frac 1.5 --out " +
              p("bench_miss.csv"));
  REQUIRE(r.code == 0);
  CHECK(contains(slurp(p("bench_miss.csv")), "bsb,–"));
}
