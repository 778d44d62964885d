#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "covmpg/eval.hpp"
#include "covmpg/execution.hpp"
#include "covmpg/game.hpp"
#include "covmpg/geometry.hpp"
#include "covmpg/qfunc.hpp"
#include "covmpg/run_config.hpp"
#include "covmpg/trainer.hpp"

namespace py = pybind11;
using namespace covmpg;

namespace {

std::string repr(const AgentState& a) {
  return "AgentState(" + std::to_string(a.x) + ", " + std::to_string(a.y) + ", " +
         std::to_string(a.z) + ")";
}

py::dict episode_dict(const EpisodeRecord& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["return"] = r.ret;
  d["duration_ms"] = r.duration_ms;
  d["epsilon"] = r.epsilon;
  d["mean_loss"] = r.mean_loss;
  d["updates"] = r.updates;
  return d;
}

}  // namespace

PYBIND11_MODULE(covmpg, m) {
  m.doc() = "Multi-agent coverage as a Markov potential game";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<GridDims>(m, "GridDims")
      .def(py::init<>())
      .def(py::init([](int nx, int ny, int nz) { return GridDims{nx, ny, nz}; }),
           py::arg("nx"), py::arg("ny"), py::arg("nz"))
      .def_readwrite("nx", &GridDims::nx)
      .def_readwrite("ny", &GridDims::ny)
      .def_readwrite("nz", &GridDims::nz)
      .def("validate", &GridDims::validate)
      .def("cell_count", &GridDims::cell_count)
      .def(py::self == py::self)
      .def("__repr__", [](const GridDims& d) {
        return "GridDims(" + std::to_string(d.nx) + ", " + std::to_string(d.ny) + ", " +
               std::to_string(d.nz) + ")";
      });

  py::class_<AgentState>(m, "AgentState")
      .def(py::init([](int x, int y, int z) { return AgentState{x, y, z}; }),
           py::arg("x"), py::arg("y"), py::arg("z") = 1)
      .def(py::init([](const py::tuple& t) {
        if (t.size() != 3) throw py::value_error("agent state needs (x, y, z)");
        return AgentState{t[0].cast<int>(), t[1].cast<int>(), t[2].cast<int>()};
      }))
      .def_readwrite("x", &AgentState::x)
      .def_readwrite("y", &AgentState::y)
      .def_readwrite("z", &AgentState::z)
      .def("valid_for", &AgentState::valid_for)
      .def(py::self == py::self)
      .def("__iter__", [](const AgentState& a) {
        return py::iter(py::make_tuple(a.x, a.y, a.z));
      })
      .def("__repr__", &repr);
  py::implicitly_convertible<py::tuple, AgentState>();

  py::enum_<Action>(m, "Action")
      .value("North", Action::North)
      .value("South", Action::South)
      .value("West", Action::West)
      .value("East", Action::East)
      .value("Up", Action::Up)
      .value("Down", Action::Down);

  py::class_<Cell>(m, "Cell")
      .def(py::init([](int x, int y) { return Cell{x, y}; }))
      .def(py::init([](const py::tuple& t) {
        if (t.size() != 2) throw py::value_error("cell needs (x, y)");
        return Cell{t[0].cast<int>(), t[1].cast<int>()};
      }))
      .def_readwrite("x", &Cell::x)
      .def_readwrite("y", &Cell::y)
      .def(py::self == py::self)
      .def("__iter__", [](const Cell& c) { return py::iter(py::make_tuple(c.x, c.y)); })
      .def("__repr__", [](const Cell& c) {
        return "Cell(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
      });
  py::implicitly_convertible<py::tuple, Cell>();

  py::class_<FieldOfInterest>(m, "FieldOfInterest")
      .def(py::init<int, int, std::vector<Cell>>(), py::arg("nx"), py::arg("ny"),
           py::arg("targets"))
      .def_static("full", &FieldOfInterest::full)
      .def_property_readonly("targets", &FieldOfInterest::targets)
      .def("__len__", &FieldOfInterest::size)
      .def("__contains__", &FieldOfInterest::contains)
      .def(py::self == py::self);

  py::class_<FovHalfAngles>(m, "FovHalfAngles")
      .def(py::init([](double px, double py_) { return FovHalfAngles{px, py_}; }),
           py::arg("phi_x_deg") = 30.0, py::arg("phi_y_deg") = 30.0)
      .def_readwrite("phi_x_deg", &FovHalfAngles::phi_x_deg)
      .def_readwrite("phi_y_deg", &FovHalfAngles::phi_y_deg);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init([](GridDims d, int n, FieldOfInterest foi, FovHalfAngles phi) {
             Scenario sc{d, n, std::move(foi), phi};
             sc.validate();
             return sc;
           }),
           py::arg("dims"), py::arg("n_agents"), py::arg("foi"),
           py::arg("phi") = FovHalfAngles{})
      .def_readonly("dims", &Scenario::dims)
      .def_readonly("n_agents", &Scenario::n_agents)
      .def_readonly("foi", &Scenario::foi)
      .def_readonly("phi", &Scenario::phi);

  m.def("generate_foi", &generate_foi, py::arg("dims"), py::arg("target_count"),
        py::arg("seed"));
  m.def("step", &step, py::arg("state"), py::arg("action"), py::arg("dims"));
  m.def("reset", py::overload_cast<const GridDims&, int, std::uint64_t>(&reset),
        py::arg("dims"), py::arg("n_agents"), py::arg("seed"));

  m.def("fov_set", &fov_set, py::arg("agent"), py::arg("foi"), py::arg("phi"));
  m.def("coverage_count", &coverage_count, py::arg("agent"), py::arg("foi"), py::arg("phi"));
  m.def("overlap_count", &overlap_count, py::arg("a"), py::arg("b"), py::arg("foi"),
        py::arg("phi"));

  py::class_<CoverageReport>(m, "CoverageReport")
      .def_readonly("f", &CoverageReport::f)
      .def_readonly("r", &CoverageReport::r)
      .def_readonly("theta", &CoverageReport::theta)
      .def_readonly("j", &CoverageReport::j)
      .def("overlap", &CoverageReport::overlap);
  m.def("evaluate", &evaluate, py::arg("state"), py::arg("foi"), py::arg("phi"));
  m.def("potential", &potential, py::arg("state"), py::arg("foi"), py::arg("phi"));
  m.def("theta", &theta, py::arg("state"), py::arg("foi"), py::arg("phi"), py::arg("i"));

  m.def("joint_action_index", &joint_action_index);
  m.def("joint_action_from_index", &joint_action_from_index);

  py::class_<QFunction>(m, "QFunction")
      .def_property_readonly("kind", [](const QFunction& q) { return std::string(q.kind()); })
      .def_property_readonly("n_agents", &QFunction::n_agents)
      .def_property_readonly("action_count", &QFunction::action_count)
      .def("value", &QFunction::value)
      .def("all_values", &QFunction::all_values, "Q(s, .) over every joint action")
      .def("greedy", [](const QFunction& q, const JointState& s) {
        const auto g = greedy_joint_action(q, s);
        return py::make_tuple(g.action, g.value);
      });
  py::class_<MlpQ, QFunction>(m, "MlpQ")
      .def(py::init([](GridDims d, int n, std::vector<int> hidden, std::uint64_t seed, bool zero) {
             return MlpQ(d, n, std::move(hidden),
                         zero ? Mlp::Init::Zero : Mlp::Init::FanInUniform, seed);
           }),
           py::arg("dims"), py::arg("n_agents"), py::arg("hidden") = std::vector<int>{64, 64},
           py::arg("seed") = 0, py::arg("zero") = false);
  py::class_<FsrQ, QFunction>(m, "FsrQ")
      .def(py::init<GridDims, int>(), py::arg("dims"), py::arg("n_agents"))
      .def("set_weight", &FsrQ::set_weight);

  py::class_<ExecConfig>(m, "ExecConfig")
      .def(py::init([](int max_steps, int sweep_limit, int window) {
             return ExecConfig{max_steps, sweep_limit, window};
           }),
           py::arg("max_steps") = 20, py::arg("sweep_limit") = 10, py::arg("stable_window") = 3)
      .def_readwrite("max_steps", &ExecConfig::max_steps)
      .def_readwrite("sweep_limit", &ExecConfig::sweep_limit)
      .def_readwrite("stable_window", &ExecConfig::stable_window);

  py::class_<ExecTrace>(m, "ExecTrace")
      .def_readonly("states", &ExecTrace::states)
      .def_readonly("actions", &ExecTrace::actions)
      .def_readonly("potentials", &ExecTrace::potentials)
      .def_readonly("steps_to_convergence", &ExecTrace::steps_to_convergence)
      .def_readonly("potential_stable_step", &ExecTrace::potential_stable_step);
  m.def("best_response_sweep", &best_response_sweep, py::arg("q"), py::arg("state"),
        py::arg("init"), py::arg("sweep_limit") = 10);
  m.def("execute", &execute, py::arg("q"), py::arg("scenario"), py::arg("s0"),
        py::arg("cfg") = ExecConfig{}, py::call_guard<py::gil_scoped_release>());

  py::class_<McSummary>(m, "McSummary")
      .def_readonly("trials", &McSummary::trials)
      .def_readonly("converged_count", &McSummary::converged_count)
      .def_readonly("mean_steps", &McSummary::mean_steps)
      .def_readonly("std_steps", &McSummary::std_steps)
      .def_readonly("histogram", &McSummary::histogram)
      .def_readonly("mean_final_potential", &McSummary::mean_final_potential)
      .def_readonly("potential_stable_count", &McSummary::potential_stable_count);
  m.def("monte_carlo", &monte_carlo, py::arg("q"), py::arg("scenario"),
        py::arg("cfg") = ExecConfig{}, py::arg("trials") = 50, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("preset", &RunConfig::preset)
      .def_readonly("seed", &RunConfig::seed)
      .def_readonly("exec", &RunConfig::exec)
      .def_readonly("trials", &RunConfig::trials)
      .def_property_readonly("scenario", [](const RunConfig& c) { return c.train.scenario; })
      .def_property_readonly("episodes", [](const RunConfig& c) { return c.train.episodes; })
      .def("to_json", &resolved_json);
  m.def("preset_names", &preset_names);
  m.def("parse_run_config", &parse_run_config, py::arg("json_text"));
  m.def("execution_start", &execution_start);

  m.def(
      "train",
      [](const RunConfig& cfg) {
        TrainResult res;
        {
          py::gil_scoped_release release;
          res = train(cfg.train);
        }
        py::list episodes;
        for (const auto& r : res.episodes) episodes.append(episode_dict(r));
        return py::make_tuple(py::cast(std::move(res.q)), episodes);
      },
      py::arg("config"), "Train per the config; returns (q, list of episode dicts).");

  m.def(
      "save_checkpoint",
      [](const std::string& path, const RunConfig& cfg, const QFunction& q) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write '" + path + "'");
        save_checkpoint(os, cfg, q);
      },
      py::arg("path"), py::arg("config"), py::arg("q"));
  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw std::runtime_error("cannot read '" + path + "'");
        Checkpoint ck = load_checkpoint(is);
        return py::make_tuple(py::cast(std::move(ck.q)), ck.scenario, ck.config_json);
      },
      py::arg("path"), "Returns (q, scenario, config_json).");
}
