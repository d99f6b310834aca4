#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bft/event_io.hpp"
#include "bft/ising.hpp"
#include "bft/metrics.hpp"
#include "bft/qubo.hpp"
#include "bft/solvers.hpp"
#include "bft/tracking.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace py = pybind11;
using namespace bft;

namespace {

BinaryState to_bits(const std::vector<int>& values) {
  BinaryState t;
  t.bits.reserve(values.size());
  for (int v : values) t.bits.push_back(static_cast<std::uint8_t>(v));
  return t;
}

std::vector<int> from_bits(const BinaryState& t) {
  return std::vector<int>(t.bits.begin(), t.bits.end());
}

SpinState to_spins(const std::vector<int>& values) {
  SpinState s;
  s.spins.reserve(values.size());
  for (int v : values) s.spins.push_back(static_cast<std::int8_t>(v));
  return s;
}

std::vector<int> from_spins(const SpinState& s) {
  return std::vector<int>(s.spins.begin(), s.spins.end());
}

std::vector<PairTerm> to_pairs(const std::vector<std::tuple<int, int, double>>& raw) {
  std::vector<PairTerm> pairs;
  pairs.reserve(raw.size());
  for (const auto& [i, j, w] : raw) pairs.push_back({i, j, w});
  return pairs;
}

std::vector<std::tuple<int, int, double>> from_pairs(const std::vector<PairTerm>& pairs) {
  std::vector<std::tuple<int, int, double>> raw;
  raw.reserve(pairs.size());
  for (const auto& p : pairs) raw.emplace_back(p.i, p.j, p.w);
  return raw;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulated-bifurcation solvers and track reconstruction";

  py::register_exception<data_error>(m, "DataError");

  // ---- problems -----------------------------------------------------------

  py::class_<QuboProblem>(m, "QuboProblem")
      .def(py::init([](int n, const std::vector<double>& bias,
                       const std::vector<std::tuple<int, int, double>>& pairs) {
             return QuboProblem(n, bias, to_pairs(pairs));
           }),
           py::arg("n"), py::arg("bias"),
           py::arg("pairs") = std::vector<std::tuple<int, int, double>>{})
      .def_property_readonly("n", &QuboProblem::n)
      .def_property_readonly("bias", &QuboProblem::bias)
      .def_property_readonly("pairs",
                             [](const QuboProblem& p) { return from_pairs(p.pairs()); })
      .def("__repr__", [](const QuboProblem& p) {
        return "QuboProblem(n=" + std::to_string(p.n()) + ", pairs=" +
               std::to_string(p.pairs().size()) + ")";
      });

  py::class_<IsingProblem>(m, "IsingProblem")
      .def(py::init([](int n, const std::vector<std::tuple<int, int, double>>& couplings,
                       const std::vector<double>& field, double offset) {
             return IsingProblem(n, to_pairs(couplings), field, offset);
           }),
           py::arg("n"), py::arg("couplings"), py::arg("field"),
           py::arg("offset") = 0.0)
      .def_property_readonly("n", &IsingProblem::n)
      .def_property_readonly(
          "couplings", [](const IsingProblem& p) { return from_pairs(p.couplings()); })
      .def_property_readonly("field", &IsingProblem::field)
      .def_property_readonly("offset", &IsingProblem::offset)
      .def("__repr__", [](const IsingProblem& p) {
        return "IsingProblem(n=" + std::to_string(p.n()) + ", couplings=" +
               std::to_string(p.couplings().size()) + ")";
      });

  m.def(
      "qubo_energy",
      [](const QuboProblem& p, const std::vector<int>& bits) {
        return qubo_energy(p, to_bits(bits));
      },
      py::arg("problem"), py::arg("bits"));
  m.def(
      "ising_energy",
      [](const IsingProblem& p, const std::vector<int>& spins) {
        return ising_energy(p, to_spins(spins));
      },
      py::arg("problem"), py::arg("spins"));
  m.def(
      "brute_force_minimum",
      [](const QuboProblem& p) {
        const auto [state, energy] = brute_force_minimum(p);
        return py::make_tuple(from_bits(state), energy);
      },
      py::arg("problem"), "Exhaustive ground state as (bits, energy); n <= 24.");
  m.def("qubo_to_ising", &qubo_to_ising, py::arg("problem"));
  m.def(
      "binary_from_spin",
      [](const std::vector<int>& spins) { return from_bits(binary_from_spin(to_spins(spins))); },
      py::arg("spins"));
  m.def(
      "spin_from_binary",
      [](const std::vector<int>& bits) { return from_spins(spin_from_binary(to_bits(bits))); },
      py::arg("bits"));

  // ---- solvers ------------------------------------------------------------

  py::class_<SbConfig>(m, "SbConfig")
      .def(py::init<>())
      .def_readwrite("a0", &SbConfig::a0)
      .def_readwrite("dt", &SbConfig::dt)
      .def_readwrite("steps", &SbConfig::steps)
      .def_readwrite("c0", &SbConfig::c0)
      .def_readwrite("shots", &SbConfig::shots)
      .def_readwrite("seed", &SbConfig::seed)
      .def_readwrite("trace_stride", &SbConfig::trace_stride)
      .def_readwrite("threads", &SbConfig::threads);

  py::class_<SaConfig>(m, "SaConfig")
      .def(py::init<>())
      .def_readwrite("sweeps", &SaConfig::sweeps)
      .def_readwrite("beta_range", &SaConfig::beta_range)
      .def_readwrite("beta_schedule", &SaConfig::beta_schedule)
      .def_readwrite("shots", &SaConfig::shots)
      .def_readwrite("seed", &SaConfig::seed)
      .def_readwrite("trace_stride", &SaConfig::trace_stride)
      .def_readwrite("threads", &SaConfig::threads);

  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("elapsed_seconds", &TraceRow::elapsed_seconds)
      .def_readonly("step", &TraceRow::step)
      .def_readonly("best_energy", &TraceRow::best_energy);

  py::class_<ShotResult>(m, "ShotResult")
      .def_property_readonly("spins",
                             [](const ShotResult& s) { return from_spins(s.spins); })
      .def_readonly("energy", &ShotResult::energy)
      .def_readonly("flagged", &ShotResult::flagged)
      .def_readonly("trace", &ShotResult::trace)
      .def_readonly("first_hit", &ShotResult::first_hit);

  py::class_<SolveRun>(m, "SolveRun")
      .def_readonly("config", &SolveRun::config)
      .def_readonly("shots", &SolveRun::shots)
      .def_readonly("best_index", &SolveRun::best_index)
      .def_readonly("wall_clock_seconds", &SolveRun::wall_clock_seconds)
      .def_property_readonly("best_energy",
                             [](const SolveRun& run) -> std::optional<double> {
                               if (run.best_index < 0) return std::nullopt;
                               return run.shots[run.best_index].energy;
                             })
      .def_property_readonly("best_spins",
                             [](const SolveRun& run) -> std::optional<std::vector<int>> {
                               if (run.best_index < 0) return std::nullopt;
                               return from_spins(run.shots[run.best_index].spins);
                             });

  m.def("auto_c0", &auto_c0, py::arg("problem"));

  auto bind_sb = [&m](const char* name, SolveRun (*fn)(const IsingProblem&, const SbConfig&),
                      SbVariant variant) {
    m.def(
        name,
        [fn, variant](const IsingProblem& p, int shots, int steps, std::uint64_t seed,
                      std::optional<double> c0, double a0, double dt, int trace_stride,
                      int threads) {
          SbConfig cfg;
          cfg.variant = variant;
          cfg.shots = shots;
          cfg.steps = steps;
          cfg.seed = seed;
          cfg.c0 = c0;
          cfg.a0 = a0;
          cfg.dt = dt;
          cfg.trace_stride = trace_stride;
          cfg.threads = threads;
          py::gil_scoped_release release;
          return fn(p, cfg);
        },
        py::arg("problem"), py::arg("shots") = 50, py::arg("steps") = 1000,
        py::arg("seed") = 0, py::arg("c0") = std::nullopt, py::arg("a0") = 1.0,
        py::arg("dt") = 1.0, py::arg("trace_stride") = 10, py::arg("threads") = 0);
  };
  bind_sb("solve_bsb", &solve_bsb, SbVariant::ballistic);
  bind_sb("solve_dsb", &solve_dsb, SbVariant::discrete);
  bind_sb("solve_asb", &solve_asb, SbVariant::adiabatic);

  m.def(
      "solve_sa",
      [](const IsingProblem& p, int shots, int sweeps, std::uint64_t seed,
         std::optional<std::pair<double, double>> beta_range,
         const std::vector<double>& beta_schedule, int trace_stride, int threads) {
        SaConfig cfg;
        cfg.shots = shots;
        cfg.sweeps = sweeps;
        cfg.seed = seed;
        cfg.beta_range = beta_range;
        cfg.beta_schedule = beta_schedule;
        cfg.trace_stride = trace_stride;
        cfg.threads = threads;
        py::gil_scoped_release release;
        return solve_sa(p, cfg);
      },
      py::arg("problem"), py::arg("shots") = 50, py::arg("sweeps") = 1000,
      py::arg("seed") = 0, py::arg("beta_range") = std::nullopt,
      py::arg("beta_schedule") = std::vector<double>{}, py::arg("trace_stride") = 10,
      py::arg("threads") = 0);

  m.def("default_beta_range", &default_beta_range, py::arg("problem"));

  // ---- tracking -----------------------------------------------------------

  py::class_<Hit>(m, "Hit")
      .def(py::init([](std::int64_t hit_id, double x, double y, double z,
                       int layer_index, std::int64_t particle_id) {
             Hit h;
             h.hit_id = hit_id;
             h.x = x;
             h.y = y;
             h.z = z;
             h.layer_index = layer_index;
             h.particle_id = particle_id;
             return h;
           }),
           py::arg("hit_id"), py::arg("x"), py::arg("y"), py::arg("z"),
           py::arg("layer_index"), py::arg("particle_id") = 0)
      .def_readwrite("hit_id", &Hit::hit_id)
      .def_readwrite("x", &Hit::x)
      .def_readwrite("y", &Hit::y)
      .def_readwrite("z", &Hit::z)
      .def_readwrite("layer_index", &Hit::layer_index)
      .def_readwrite("particle_id", &Hit::particle_id)
      .def_property_readonly("r", &Hit::r);

  py::class_<TrackingConfig>(m, "TrackingConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &TrackingConfig::alpha)
      .def_readwrite("beta", &TrackingConfig::beta)
      .def_readwrite("gamma", &TrackingConfig::gamma)
      .def_readwrite("lam", &TrackingConfig::lambda)
      .def_readwrite("qpt_max", &TrackingConfig::qpt_max)
      .def_readwrite("dtheta_max", &TrackingConfig::dtheta_max)
      .def_readwrite("max_holes", &TrackingConfig::max_holes)
      .def_readwrite("dqpt_pair_max", &TrackingConfig::dqpt_pair_max)
      .def_readwrite("s_min", &TrackingConfig::s_min)
      .def_readwrite("min_track_hits", &TrackingConfig::min_track_hits)
      .def_readwrite("min_seed_track_hits", &TrackingConfig::min_seed_track_hits)
      .def_readwrite("b_field", &TrackingConfig::b_field)
      .def_readwrite("coord_unit_mm", &TrackingConfig::coord_unit_mm)
      .def_readwrite("layer_gap_max", &TrackingConfig::layer_gap_max)
      .def_readwrite("dz_over_dr_max", &TrackingConfig::dz_over_dr_max)
      .def_readwrite("z_origin_max", &TrackingConfig::z_origin_max);

  py::class_<Doublet>(m, "Doublet")
      .def_readonly("inner_hit", &Doublet::inner_hit)
      .def_readonly("outer_hit", &Doublet::outer_hit)
      .def_readonly("dz", &Doublet::dz)
      .def_readonly("dr", &Doublet::dr);

  py::class_<TripletKinematics>(m, "TripletKinematics")
      .def_readonly("qpt", &TripletKinematics::qpt)
      .def_readonly("theta", &TripletKinematics::theta)
      .def_readonly("d0", &TripletKinematics::d0)
      .def_readonly("z0", &TripletKinematics::z0)
      .def_readonly("holes", &TripletKinematics::holes);

  py::class_<Triplet>(m, "Triplet")
      .def_readonly("hits", &Triplet::hits)
      .def_readonly("qpt", &Triplet::qpt)
      .def_readonly("theta", &Triplet::theta)
      .def_readonly("d0", &Triplet::d0)
      .def_readonly("z0", &Triplet::z0)
      .def_readonly("dtheta", &Triplet::dtheta)
      .def_readonly("holes", &Triplet::holes);

  py::class_<TrackCandidate>(m, "TrackCandidate")
      .def_readonly("hit_ids", &TrackCandidate::hit_ids)
      .def_readonly("triplet_indices", &TrackCandidate::triplet_indices);

  py::class_<QuboBuild>(m, "QuboBuild")
      .def_readonly("problem", &QuboBuild::problem)
      .def_readonly("variables", &QuboBuild::variables)
      .def_readonly("empty_flagged", &QuboBuild::empty_flagged);

  m.def("generate_doublets", &generate_doublets, py::arg("hits"),
        py::arg("config") = TrackingConfig{});
  m.def("triplet_kinematics", &triplet_kinematics, py::arg("h1"), py::arg("h2"),
        py::arg("h3"), py::arg("config") = TrackingConfig{});
  m.def("build_triplets", &build_triplets, py::arg("doublets"), py::arg("hits"),
        py::arg("config") = TrackingConfig{});
  m.def("pair_strength", &pair_strength, py::arg("ti"), py::arg("tj"));
  m.def("bias_weight", &bias_weight, py::arg("triplet"),
        py::arg("config") = TrackingConfig{});
  m.def("assemble_qubo", &assemble_qubo, py::arg("triplets"),
        py::arg("config") = TrackingConfig{});
  m.def(
      "extract_tracks",
      [](const std::vector<int>& selected, const QuboBuild& build,
         const TrackingConfig& cfg) { return extract_tracks(to_bits(selected), build, cfg); },
      py::arg("selected"), py::arg("build"), py::arg("config") = TrackingConfig{});

  // ---- metrics ------------------------------------------------------------

  py::class_<EvalCounts>(m, "EvalCounts")
      .def_readonly("tp", &EvalCounts::tp)
      .def_readonly("fp", &EvalCounts::fp)
      .def_readonly("fn", &EvalCounts::fn);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("total", &EvalReport::total)
      .def_readonly("efficiency", &EvalReport::efficiency)
      .def_readonly("purity", &EvalReport::purity)
      .def_readonly("efficiency_defined", &EvalReport::efficiency_defined)
      .def_readonly("purity_defined", &EvalReport::purity_defined)
      .def_readonly("per_event", &EvalReport::per_event);

  py::class_<TttReport>(m, "TttReport")
      .def_readonly("target_energy", &TttReport::target_energy)
      .def_readonly("confidence", &TttReport::confidence)
      .def_readonly("ttt_seconds", &TttReport::ttt_seconds)
      .def_readonly("first_hit_seconds", &TttReport::first_hit_seconds)
      .def_readonly("success_fraction", &TttReport::success_fraction);

  m.def("truth_doublets", &truth_doublets, py::arg("hits"),
        py::arg("config") = TrackingConfig{});
  m.def("evaluate", &evaluate, py::arg("candidates"), py::arg("truth"),
        py::arg("event_label") = "");
  m.def("compute_ttt", &compute_ttt, py::arg("run"), py::arg("target_fraction"),
        py::arg("confidence") = 0.99);
  m.def("compute_ttt_at", &compute_ttt_at, py::arg("run"), py::arg("target_energy"),
        py::arg("confidence") = 0.99);

  // ---- events and files ---------------------------------------------------

  py::class_<TruthParticle>(m, "TruthParticle")
      .def_readonly("id", &TruthParticle::id)
      .def_readonly("qpt", &TruthParticle::qpt)
      .def_readonly("theta", &TruthParticle::theta)
      .def_readonly("phi0", &TruthParticle::phi0)
      .def_readonly("d0", &TruthParticle::d0)
      .def_readonly("z0", &TruthParticle::z0);

  py::class_<EventBundle>(m, "EventBundle")
      .def_readonly("event_id", &EventBundle::event_id)
      .def_readonly("hits", &EventBundle::hits)
      .def_readonly("truth", &EventBundle::truth)
      .def_readonly("particles", &EventBundle::particles)
      .def_readonly("source", &EventBundle::source)
      .def_readonly("rows_total", &EventBundle::rows_total)
      .def_readonly("empty_flagged", &EventBundle::empty_flagged);

  m.def(
      "load_trackml_event",
      [](const std::string& hits_path, const std::string& truth_path, bool barrel_only) {
        return load_trackml_event(hits_path, truth_path, barrel_only);
      },
      py::arg("hits_path"), py::arg("truth_path"), py::arg("barrel_only") = true);
  m.def(
      "generate_synthetic_event",
      [](int n_tracks, double noise_fraction, std::uint64_t seed) {
        return generate_synthetic_event(n_tracks, noise_fraction, seed);
      },
      py::arg("n_tracks"), py::arg("noise_fraction") = 0.0, py::arg("seed") = 0);
  m.def(
      "write_trackml_event",
      [](const EventBundle& event, const std::string& hits_path,
         const std::string& truth_path) {
        write_trackml_event(event, hits_path, truth_path);
      },
      py::arg("event"), py::arg("hits_path"), py::arg("truth_path"));

  m.def("save_qubo", &save_qubo, py::arg("problem"), py::arg("path"),
        py::arg("meta") = std::map<std::string, std::string>{});
  m.def("load_qubo", &load_qubo, py::arg("path"));
  m.def("save_index_map", &save_index_map, py::arg("build"), py::arg("path"));
  m.def("load_index_map", &load_index_map, py::arg("path"));
  m.def("save_solve_run", &save_solve_run, py::arg("run"), py::arg("path"));
  m.def("load_solve_run", &load_solve_run, py::arg("path"));
  m.def("save_trace_csv", &save_trace_csv, py::arg("run"), py::arg("path"));
  m.def("save_eval_report", &save_eval_report, py::arg("report"), py::arg("path"));
  m.def("save_ttt_report", &save_ttt_report, py::arg("report"), py::arg("path"));
}
