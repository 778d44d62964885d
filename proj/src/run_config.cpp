#include "covmpg/run_config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "text_io.hpp"

namespace covmpg {

using nlohmann::json;

namespace {

constexpr const char* kCheckpointHeader = "covmpg-checkpoint";
constexpr int kCheckpointVersion = 1;
constexpr std::uint64_t kFoiStream = 100;
constexpr std::uint64_t kStartStream = 200;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + where + "." + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  dims.validate();
  phi.validate();
  if (n_agents < 1) throw ConfigError("scenario.agents must be >= 1");
  const int plane = dims.nx * dims.ny;
  if (target_count < 1 || target_count > plane) {
    throw ConfigError("scenario.targets must be in [1, " +
                      std::to_string(plane) + "]");
  }
  if (trials < 1) throw ConfigError("evaluate.trials must be >= 1");
  exec.validate();
  TrainConfig t = train;
  t.scenario = resolve_scenario(*this);
  t.validate();
}

std::vector<std::string> preset_names() {
  return {"2agent-7x7x4", "4agent-9x9x4"};
}

RunConfig preset(const std::string& name) {
  RunConfig cfg;
  cfg.preset = name;
  cfg.phi = {30.0, 30.0};
  if (name == "2agent-7x7x4") {
    cfg.dims = {7, 7, 4};
    cfg.n_agents = 2;
    cfg.target_count = 16;
  } else if (name == "4agent-9x9x4") {
    cfg.dims = {9, 9, 4};
    cfg.n_agents = 4;
    cfg.target_count = 30;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"preset", "seed", "scenario", "train", "execute", "evaluate"},
                 "config");

  RunConfig cfg;
  if (doc.contains("preset")) {
    cfg = preset(doc.at("preset").get<std::string>());
  }
  read(doc, "seed", cfg.seed, "config");

  if (doc.contains("scenario")) {
    const json& sc = doc.at("scenario");
    reject_unknown(sc, {"dims", "agents", "targets", "fov_half_angles_deg"},
                   "scenario");
    if (sc.contains("dims")) {
      std::vector<int> d;
      read(sc, "dims", d, "scenario");
      if (d.size() != 3) throw ConfigError("scenario.dims needs 3 entries");
      cfg.dims = {d[0], d[1], d[2]};
    }
    read(sc, "agents", cfg.n_agents, "scenario");
    read(sc, "targets", cfg.target_count, "scenario");
    if (sc.contains("fov_half_angles_deg")) {
      std::vector<double> p;
      read(sc, "fov_half_angles_deg", p, "scenario");
      if (p.size() != 2) throw ConfigError("scenario.fov_half_angles_deg needs 2 entries");
      cfg.phi = {p[0], p[1]};
    }
  }
  if (cfg.preset.empty()) {
    const json sc = doc.value("scenario", json::object());
    for (const char* key : {"dims", "agents", "targets"}) {
      if (!sc.contains(key)) {
        throw ConfigError(std::string("scenario.") + key +
                          " is required when no preset is given");
      }
    }
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown(t, {"episodes", "max_steps", "gamma", "alpha", "batch",
                       "eps_max", "eps_min", "eps_decay", "backend", "hidden",
                       "replay_capacity"},
                   "train");
    read(t, "episodes", cfg.train.episodes, "train");
    read(t, "max_steps", cfg.train.max_steps, "train");
    read(t, "gamma", cfg.train.gamma, "train");
    read(t, "alpha", cfg.train.alpha, "train");
    read(t, "batch", cfg.train.batch, "train");
    read(t, "eps_max", cfg.train.eps_max, "train");
    read(t, "eps_min", cfg.train.eps_min, "train");
    read(t, "eps_decay", cfg.train.eps_decay, "train");
    read(t, "hidden", cfg.train.hidden, "train");
    read(t, "replay_capacity", cfg.train.replay_capacity, "train");
    if (t.contains("backend")) {
      std::string b;
      read(t, "backend", b, "train");
      cfg.train.backend = parse_backend(b);
    }
  }
  if (doc.contains("execute")) {
    const json& e = doc.at("execute");
    reject_unknown(e, {"max_steps", "sweep_limit", "stable_window"}, "execute");
    read(e, "max_steps", cfg.exec.max_steps, "execute");
    read(e, "sweep_limit", cfg.exec.sweep_limit, "execute");
    read(e, "stable_window", cfg.exec.stable_window, "execute");
  }
  if (doc.contains("evaluate")) {
    const json& e = doc.at("evaluate");
    reject_unknown(e, {"trials"}, "evaluate");
    read(e, "trials", cfg.trials, "evaluate");
  }
  cfg.validate();
  return resolved(std::move(cfg));
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

Scenario resolve_scenario(const RunConfig& cfg) {
  Scenario sc;
  sc.dims = cfg.dims;
  sc.n_agents = cfg.n_agents;
  sc.phi = cfg.phi;
  sc.foi = generate_foi(cfg.dims, cfg.target_count,
                        derive_seed(cfg.seed, kFoiStream));
  return sc;
}

RunConfig resolved(RunConfig cfg) {
  cfg.train.scenario = resolve_scenario(cfg);
  cfg.train.seed = cfg.seed;
  return cfg;
}

std::string resolved_json(const RunConfig& cfg) {
  json j;
  j["preset"] = cfg.preset;
  j["seed"] = cfg.seed;
  j["scenario"] = {{"dims", {cfg.dims.nx, cfg.dims.ny, cfg.dims.nz}},
                   {"agents", cfg.n_agents},
                   {"targets", cfg.target_count},
                   {"fov_half_angles_deg", {cfg.phi.phi_x_deg, cfg.phi.phi_y_deg}}};
  const TrainConfig& t = cfg.train;
  j["train"] = {{"episodes", t.episodes},   {"max_steps", t.max_steps},
                {"gamma", t.gamma},         {"alpha", t.alpha},
                {"batch", t.batch},         {"eps_max", t.eps_max},
                {"eps_min", t.eps_min},     {"eps_decay", t.eps_decay},
                {"backend", backend_name(t.backend)},
                {"hidden", t.hidden},       {"replay_capacity", t.replay_capacity}};
  j["execute"] = {{"max_steps", cfg.exec.max_steps},
                  {"sweep_limit", cfg.exec.sweep_limit},
                  {"stable_window", cfg.exec.stable_window}};
  j["evaluate"] = {{"trials", cfg.trials}};
  return j.dump();
}

JointState execution_start(const RunConfig& cfg) {
  return reset(cfg.dims, cfg.n_agents, derive_seed(cfg.seed, kStartStream));
}

void save_checkpoint(std::ostream& os, const RunConfig& cfg,
                     const QFunction& q) {
  const Scenario sc = resolve_scenario(cfg);
  os << kCheckpointHeader << ' ' << kCheckpointVersion << '\n';
  os << "config " << resolved_json(cfg) << '\n';
  os << "scenario " << sc.dims.nx << ' ' << sc.dims.ny << ' ' << sc.dims.nz
     << ' ' << sc.n_agents << ' ';
  detail::write_double(os, sc.phi.phi_x_deg);
  os << ' ';
  detail::write_double(os, sc.phi.phi_y_deg);
  os << '\n' << "foi " << sc.foi.size();
  for (const Cell& c : sc.foi.targets()) os << ' ' << c.x << ' ' << c.y;
  os << '\n';
  save_qfunction(os, q);
}

Checkpoint load_checkpoint(std::istream& is) {
  Checkpoint ck;
  detail::expect_token(is, kCheckpointHeader);
  const int version = detail::read_int<int>(is);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  detail::expect_token(is, "config");
  is >> std::ws;
  if (!std::getline(is, ck.config_json) || !json::accept(ck.config_json)) {
    throw std::runtime_error("checkpoint config line is malformed");
  }
  detail::expect_token(is, "scenario");
  Scenario& sc = ck.scenario;
  sc.dims.nx = detail::read_int<int>(is);
  sc.dims.ny = detail::read_int<int>(is);
  sc.dims.nz = detail::read_int<int>(is);
  sc.n_agents = detail::read_int<int>(is);
  sc.phi.phi_x_deg = detail::read_double(is);
  sc.phi.phi_y_deg = detail::read_double(is);
  detail::expect_token(is, "foi");
  const auto count = detail::read_int<int>(is);
  if (count < 0 || count > 1 << 20) throw std::runtime_error("bad FOI size");
  std::vector<Cell> cells(count);
  for (auto& c : cells) {
    c.x = detail::read_int<int>(is);
    c.y = detail::read_int<int>(is);
  }
  try {
    sc.foi = FieldOfInterest(sc.dims.nx, sc.dims.ny, std::move(cells));
    sc.validate();
  } catch (const ConfigError& e) {
    throw std::runtime_error(std::string("checkpoint scenario invalid: ") + e.what());
  }
  ck.q = load_qfunction(is);
  if (!(ck.q->dims() == sc.dims) || ck.q->n_agents() != sc.n_agents) {
    throw std::runtime_error("checkpoint Q-function does not match its scenario");
  }
  return ck;
}

void check_compatible(const Checkpoint& ck, const RunConfig& cfg) {
  const Scenario want = resolve_scenario(cfg);
  if (!(ck.scenario.dims == want.dims) || ck.scenario.n_agents != want.n_agents ||
      !(ck.scenario.phi == want.phi) || !(ck.scenario.foi == want.foi)) {
    throw ConfigError("checkpoint was trained on a different scenario");
  }
  if (ck.q->kind() != backend_name(cfg.train.backend)) {
    throw ConfigError("checkpoint backend '" + std::string(ck.q->kind()) +
                      "' does not match configured backend '" +
                      backend_name(cfg.train.backend) + "'");
  }
}

}  // namespace covmpg
