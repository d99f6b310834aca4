#include "bft/event_io.hpp"
#include "bft/ising.hpp"
#include "bft/metrics.hpp"
#include "bft/qubo.hpp"
#include "bft/solvers.hpp"
#include "bft/tracking.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace {

using namespace bft;

// Shortest decimal form that round-trips; keeps printed energies stable
// across runs.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error(path + ": cannot open for writing");
    out << content;
    if (!out.flush()) throw data_error(path + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw data_error(path + ": rename failed: " + ec.message());
}

// Key=value configuration files. CLI11's own set_config never fires for
// subcommands, so the file is applied by hand after parsing: values fill in
// only the options that were not given on the command line.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path + ": cannot open config file");
  auto strip = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ": line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw std::invalid_argument(path + ": line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

std::string default_map_path(const std::string& qubo_path) {
  std::filesystem::path p(qubo_path);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + ".map" + ext;
}

std::string default_qubo_path(const std::string& map_path) {
  // Inverse of default_map_path: strip the ".map" tail of the stem.
  std::filesystem::path p(map_path);
  const std::string ext = p.extension().string();
  p.replace_extension();
  std::string stem = p.string();
  const std::string tail = ".map";
  if (stem.size() > tail.size() && stem.compare(stem.size() - tail.size(), tail.size(), tail) == 0)
    stem.resize(stem.size() - tail.size());
  return stem + ext;
}

std::map<std::string, std::string> qubo_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(path + ": cannot open");
  try {
    const auto doc = nlohmann::json::parse(in);
    std::map<std::string, std::string> meta;
    if (doc.contains("meta"))
      for (const auto& [key, value] : doc.at("meta").items())
        meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
}

struct BuildQuboArgs {
  std::string config;
  std::string hits, truth, out, map;
  bool barrel_only = true;
};

int cmd_build_qubo(const BuildQuboArgs& a) {
  const TrackingConfig cfg;
  const EventBundle event = load_trackml_event(a.hits, a.truth, a.barrel_only);
  const auto doublets = generate_doublets(event.hits, cfg);
  const auto triplets = build_triplets(doublets, event.hits, cfg);
  const QuboBuild build = assemble_qubo(triplets, cfg);

  int particles = 0;
  {
    std::set<std::int64_t> ids;
    for (const auto& h : event.hits)
      if (h.particle_id != 0) ids.insert(h.particle_id);
    particles = static_cast<int>(ids.size());
  }
  std::map<std::string, std::string> meta = {
      {"event", std::to_string(event.event_id)},
      {"source", std::filesystem::path(a.hits).filename().string()},
      {"particles", std::to_string(particles)},
      {"hits", std::to_string(event.hits.size())},
      {"triplets", std::to_string(triplets.size())},
  };
  const std::string map_path = a.map.empty() ? default_map_path(a.out) : a.map;
  save_qubo(build.problem, a.out, meta);
  save_index_map(build, map_path);

  std::cerr << "config: hits=" << a.hits << " truth=" << a.truth
            << " barrel_only=" << (a.barrel_only ? 1 : 0) << "\n";
  if (build.empty_flagged)
    std::cerr << "warning: no triplet survived pruning; wrote an empty problem\n";
  if (event.empty_flagged)
    std::cerr << "warning: event has no usable hits\n";
  std::cout << "variables " << build.problem.n() << "\n"
            << "pairs " << build.problem.pairs().size() << "\n";
  return 0;
}

struct SolveArgs {
  std::string config;
  std::string qubo, solver = "bsb", out, trace;
  int shots = 50;
  int steps = 1000;
  std::uint64_t seed = 0;
  std::optional<double> c0;
  int trace_stride = 10;
  int threads = 0;
};

int cmd_solve(const SolveArgs& a) {
  const bool is_sa = a.solver == "sa";
  if (!is_sa) sb_variant_from_string(a.solver);  // unknown names: usage error

  const QuboProblem qubo = load_qubo(a.qubo);
  const IsingProblem ising = qubo_to_ising(qubo);

  SolveRun run;
  if (is_sa) {
    SaConfig cfg;
    cfg.sweeps = a.steps;
    cfg.shots = a.shots;
    cfg.seed = a.seed;
    cfg.trace_stride = a.trace_stride;
    cfg.threads = a.threads;
    run = solve_sa(ising, cfg);
  } else {
    SbConfig cfg;
    cfg.variant = sb_variant_from_string(a.solver);
    cfg.steps = a.steps;
    cfg.shots = a.shots;
    cfg.seed = a.seed;
    cfg.c0 = a.c0;
    cfg.trace_stride = a.trace_stride;
    cfg.threads = a.threads;
    run = (cfg.variant == SbVariant::ballistic   ? solve_bsb
           : cfg.variant == SbVariant::discrete ? solve_dsb
                                                : solve_asb)(ising, cfg);
  }

  save_solve_run(run, a.out);
  if (!a.trace.empty()) save_trace_csv(run, a.trace);

  std::cerr << "config: solver=" << a.solver << " shots=" << a.shots
            << " steps=" << a.steps << " seed=" << a.seed
            << " threads=" << a.threads;
  if (const auto* sb = std::get_if<SbConfig>(&run.config); sb && sb->c0)
    std::cerr << " c0=" << fmt(*sb->c0);
  std::cerr << "\n";

  if (run.best_index < 0) {
    std::cerr << "error: every shot overflowed; no usable result\n";
    return 3;
  }
  std::cout << "best_energy " << fmt(run.shots[run.best_index].energy) << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string config;
  std::string result, qubo_map, qubo, hits, truth, out;
  bool barrel_only = true;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const SolveRun run = load_solve_run(a.result);
  const auto variables = load_index_map(a.qubo_map);
  const std::string qubo_path = a.qubo.empty() ? default_qubo_path(a.qubo_map) : a.qubo;
  const QuboProblem qubo = load_qubo(qubo_path);
  if (qubo.n() != static_cast<int>(variables.size()))
    throw data_error(a.qubo_map + ": " + std::to_string(variables.size()) +
                     " variables, but the problem has " + std::to_string(qubo.n()));

  QuboBuild build;
  build.problem = qubo;
  for (const auto& hits3 : variables) {
    Triplet t;
    t.hits = hits3;
    build.variables.push_back(t);
  }

  BinaryState selected;
  selected.bits.assign(variables.size(), 0);
  if (run.best_index >= 0) {
    const auto& spins = run.shots[run.best_index].spins.spins;
    if (spins.size() != variables.size())
      throw data_error(a.result + ": result length " + std::to_string(spins.size()) +
                       " does not match map length " + std::to_string(variables.size()));
    for (std::size_t k = 0; k < spins.size(); ++k)
      selected.bits[k] = spins[k] > 0 ? 1 : 0;
  } else {
    std::cerr << "warning: run has no usable shot; evaluating an empty selection\n";
  }

  const TrackingConfig cfg;
  const EventBundle event = load_trackml_event(a.hits, a.truth, a.barrel_only);
  const auto candidates = extract_tracks(selected, build, cfg);
  const EvalReport report =
      evaluate(candidates, truth_doublets(event.hits, cfg), std::to_string(event.event_id));
  save_eval_report(report, a.out);

  std::cerr << "config: result=" << a.result << " map=" << a.qubo_map
            << " qubo=" << qubo_path << "\n";
  std::cout << "tracks " << candidates.size() << "\n"
            << "efficiency " << (report.efficiency_defined ? fmt(report.efficiency) : "n/a")
            << "\n"
            << "purity " << (report.purity_defined ? fmt(report.purity) : "n/a") << "\n";
  return 0;
}

struct BenchmarkArgs {
  std::string config;
  std::string qubo, out;
  std::vector<std::string> solvers = {"bsb", "dsb", "sa"};
  double target_frac = 0.999;
  double confidence = 0.99;
  int shots = 50;
  int steps = 1000;
  std::uint64_t seed = 0;
  int threads = 0;
};

int cmd_benchmark(const BenchmarkArgs& a) {
  for (const auto& name : a.solvers)
    if (name != "sa") sb_variant_from_string(name);

  const QuboProblem qubo = load_qubo(a.qubo);
  const auto meta = qubo_meta(a.qubo);
  const IsingProblem ising = qubo_to_ising(qubo);

  std::vector<SolveRun> runs;
  for (const auto& name : a.solvers) {
    SolveArgs sa;
    sa.solver = name;
    if (name == "sa") {
      SaConfig cfg;
      cfg.sweeps = a.steps;
      cfg.shots = a.shots;
      cfg.seed = a.seed;
      cfg.threads = a.threads;
      runs.push_back(solve_sa(ising, cfg));
    } else {
      SbConfig cfg;
      cfg.variant = sb_variant_from_string(name);
      cfg.steps = a.steps;
      cfg.shots = a.shots;
      cfg.seed = a.seed;
      cfg.threads = a.threads;
      runs.push_back((cfg.variant == SbVariant::ballistic   ? solve_bsb
                      : cfg.variant == SbVariant::discrete ? solve_dsb
                                                           : solve_asb)(ising, cfg));
    }
  }

  // One shared target: the best energy any solver reached.
  bool any = false;
  double best = 0.0;
  for (const auto& run : runs) {
    if (run.best_index < 0) continue;
    const double e = run.shots[run.best_index].energy;
    if (!any || e < best) best = e;
    any = true;
  }
  if (!any) {
    std::cerr << "error: no solver produced a usable shot\n";
    return 3;
  }
  const double target = a.target_frac * best;

  const std::string particles = meta.count("particles") ? meta.at("particles") : "-";
  std::ostringstream csv;
  csv << "particles,qubo_size,solver,ttt_seconds\n";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const TttReport rep = compute_ttt_at(runs[k], target, a.confidence);
    csv << particles << ',' << qubo.n() << ',' << a.solvers[k] << ','
        << (rep.ttt_seconds ? fmt(*rep.ttt_seconds) : "–") << "\n";
  }
  atomic_write_text(a.out, csv.str());

  std::cerr << "config: solvers=";
  for (std::size_t k = 0; k < a.solvers.size(); ++k)
    std::cerr << (k ? "," : "") << a.solvers[k];
  std::cerr << " shots=" << a.shots << " steps=" << a.steps << " seed=" << a.seed
            << " target=" << fmt(target) << " confidence=" << fmt(a.confidence) << "\n";
  std::cout << "target_energy " << fmt(target) << "\n";
  return 0;
}

struct SynthArgs {
  std::string config;
  std::string hits, truth;
  int tracks = 25;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a) {
  const EventBundle event = generate_synthetic_event(a.tracks, a.noise, a.seed);
  write_trackml_event(event, a.hits, a.truth);
  std::cerr << "config: tracks=" << a.tracks << " noise=" << fmt(a.noise)
            << " seed=" << a.seed << "\n";
  std::cout << "hits " << event.hits.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated-bifurcation track reconstruction pipeline"};
  app.require_subcommand(1);

  BuildQuboArgs bq;
  CLI::App* build = app.add_subcommand("build-qubo", "Convert an event to a QUBO");
  build->add_option("--hits", bq.hits, "TrackML hits CSV")->required();
  build->add_option("--truth", bq.truth, "TrackML truth CSV")->required();
  build->add_option("--out", bq.out, "Output QUBO JSON")->required();
  build->add_option("--map", bq.map,
                    "Index-map sidecar path (default: <out> with a .map stem suffix)");
  build->add_flag("--barrel-only,!--no-barrel-only", bq.barrel_only,
                  "Keep only hits on the mapped barrel layers");
  build->add_option("--config", bq.config, "Key=value configuration file");

  SolveArgs sv;
  CLI::App* solve = app.add_subcommand("solve", "Run a solver on a QUBO file");
  solve->add_option("--qubo", sv.qubo, "QUBO JSON")->required();
  solve->add_option("--solver", sv.solver, "bsb|dsb|asb|sa");
  solve->add_option("--shots", sv.shots, "Independent shots");
  solve->add_option("--steps", sv.steps, "Integration steps (sweeps for sa)");
  solve->add_option("--seed", sv.seed, "Random seed");
  solve->add_option("--c0", sv.c0, "Coupling strength (default: from the problem)");
  solve->add_option("--trace", sv.trace, "Optional per-step trace CSV");
  solve->add_option("--trace-stride", sv.trace_stride, "Steps between trace rows");
  solve->add_option("--out", sv.out, "Output run JSON")->required();
  solve->add_option("--threads", sv.threads, "Worker threads (0 = all cores)")
      ->envname("BIFURCTRACK_THREADS");
  solve->add_option("--config", sv.config, "Key=value configuration file");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a run against truth");
  evaluate->add_option("--result", ev.result, "SolveRun JSON")->required();
  evaluate->add_option("--qubo-map", ev.qubo_map, "Index-map sidecar")->required();
  evaluate->add_option("--qubo", ev.qubo, "QUBO JSON (default: derived from the map path)");
  evaluate->add_option("--hits", ev.hits, "TrackML hits CSV")->required();
  evaluate->add_option("--truth", ev.truth, "TrackML truth CSV")->required();
  evaluate->add_option("--out", ev.out, "Output report JSON")->required();
  evaluate->add_flag("--barrel-only,!--no-barrel-only", ev.barrel_only,
                     "Keep only hits on the mapped barrel layers");
  evaluate->add_option("--config", ev.config, "Key=value configuration file");

  BenchmarkArgs bm;
  CLI::App* benchmark = app.add_subcommand("benchmark", "Time-to-target comparison");
  benchmark->add_option("--qubo", bm.qubo, "QUBO JSON")->required();
  benchmark->add_option("--solvers", bm.solvers, "Comma-separated solver list")
      ->delimiter(',');
  benchmark->add_option("--target-frac", bm.target_frac, "Target fraction of best energy");
  benchmark->add_option("--confidence", bm.confidence, "Success confidence");
  benchmark->add_option("--shots", bm.shots, "Shots per solver");
  benchmark->add_option("--steps", bm.steps, "Steps (sweeps for sa)");
  benchmark->add_option("--seed", bm.seed, "Random seed");
  benchmark->add_option("--out", bm.out, "Output CSV")->required();
  benchmark->add_option("--threads", bm.threads, "Worker threads (0 = all cores)")
      ->envname("BIFURCTRACK_THREADS");
  benchmark->add_option("--config", bm.config, "Key=value configuration file");

  SynthArgs sy;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic event");
  synth->add_option("--tracks", sy.tracks, "Number of tracks");
  synth->add_option("--noise", sy.noise, "Noise fraction of the signal hits");
  synth->add_option("--seed", sy.seed, "Random seed");
  synth->add_option("--hits", sy.hits, "Output hits CSV")->required();
  synth->add_option("--truth", sy.truth, "Output truth CSV")->required();
  synth->add_option("--config", sy.config, "Key=value configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) {
      apply_config_file(build, bq.config);
      return cmd_build_qubo(bq);
    }
    if (solve->parsed()) {
      apply_config_file(solve, sv.config);
      return cmd_solve(sv);
    }
    if (evaluate->parsed()) {
      apply_config_file(evaluate, ev.config);
      return cmd_evaluate(ev);
    }
    if (benchmark->parsed()) {
      apply_config_file(benchmark, bm.config);
      return cmd_benchmark(bm);
    }
    if (synth->parsed()) {
      apply_config_file(synth, sy.config);
      return cmd_synth(sy);
    }
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
