#include "covmpg/eval.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>

namespace covmpg {

McSummary monte_carlo(const QFunction& q, const Scenario& sc,
                      const ExecConfig& cfg, int trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("trials must be positive");
  McSummary out;
  out.trials = trials;
  std::vector<int> steps;
  double final_j = 0.0;
  for (int k = 0; k < trials; ++k) {
    const JointState s0 =
        reset(sc.dims, sc.n_agents, derive_seed(seed, static_cast<std::uint64_t>(k)));
    const ExecTrace trace = execute(q, sc, s0, cfg);
    final_j += trace.potentials.back();
    if (trace.potential_stable_step) ++out.potential_stable_count;
    if (trace.steps_to_convergence) {
      steps.push_back(*trace.steps_to_convergence);
      ++out.histogram[*trace.steps_to_convergence];
    }
  }
  out.converged_count = static_cast<int>(steps.size());
  out.mean_final_potential = final_j / trials;
  if (!steps.empty()) {
    double sum = 0.0;
    for (int v : steps) sum += v;
    out.mean_steps = sum / static_cast<double>(steps.size());
    double var = 0.0;
    for (int v : steps) var += (v - out.mean_steps) * (v - out.mean_steps);
    out.std_steps = std::sqrt(var / static_cast<double>(steps.size()));
  }
  return out;
}

void write_summary_json(std::ostream& os, const McSummary& s,
                        const std::string& config_json) {
  nlohmann::ordered_json j;
  if (!config_json.empty()) j["config"] = nlohmann::json::parse(config_json);
  j["trials"] = s.trials;
  j["converged_count"] = s.converged_count;
  j["mean_steps"] = s.mean_steps;
  j["std_steps"] = s.std_steps;
  j["mean_final_potential"] = s.mean_final_potential;
  j["potential_stable_count"] = s.potential_stable_count;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [steps, count] : s.histogram)
    hist[std::to_string(steps)] = count;
  j["histogram"] = hist;
  os << j.dump(2) << '\n';
}

void write_histogram_csv(std::ostream& os, const McSummary& s,
                         const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "steps,count\n";
  for (const auto& [steps, count] : s.histogram)
    os << steps << ',' << count << '\n';
}

TinyMdp TinyMdp::build(const Scenario& sc) {
  sc.validate();
  TinyMdp mdp;
  mdp.scenario = sc;
  mdp.actions = joint_action_count(sc.n_agents);
  const auto cells = static_cast<std::size_t>(sc.dims.cell_count());
  std::size_t count = 1;
  for (int i = 0; i < sc.n_agents; ++i) count *= cells;
  if (count * mdp.actions > kMaxPairs) {
    throw ConfigError("scenario too large to enumerate");
  }

  const FsrQ indexer(sc.dims, sc.n_agents);
  mdp.states.resize(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    JointState s(sc.n_agents);
    std::size_t rest = idx;
    for (int i = sc.n_agents - 1; i >= 0; --i) {
      const auto cell = static_cast<int>(rest % cells);
      rest /= cells;
      s[i].z = cell % sc.dims.nz + 1;
      s[i].y = (cell / sc.dims.nz) % sc.dims.ny;
      s[i].x = cell / (sc.dims.nz * sc.dims.ny);
    }
    if (indexer.state_index(s) != idx) {
      throw std::logic_error("state enumeration out of sync with FSR index");
    }
    mdp.states[idx] = std::move(s);
  }

  mdp.next.resize(count * mdp.actions);
  mdp.reward.resize(count * mdp.actions);
  for (std::size_t si = 0; si < count; ++si) {
    for (std::size_t ai = 0; ai < mdp.actions; ++ai) {
      const JointState nxt =
          step(mdp.states[si], joint_action_from_index(ai, sc.n_agents), sc.dims);
      mdp.next[mdp.pair(si, ai)] = indexer.state_index(nxt);
      mdp.reward[mdp.pair(si, ai)] = potential(nxt, sc.foi, sc.phi);
    }
  }
  return mdp;
}

ValueIterationResult value_iteration(const TinyMdp& mdp, double gamma,
                                     double tol) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("discount must lie in [0, 1)");
  }
  const auto ns = static_cast<Eigen::Index>(mdp.states.size());
  const auto na = static_cast<Eigen::Index>(mdp.actions);
  ValueIterationResult out;
  out.q = Eigen::MatrixXd::Zero(ns, na);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ns);
  // With gamma < 1 and bounded rewards the sweeps contract; the cap only
  // guards against a pathological tol.
  for (int sweep = 0; sweep < 100000; ++sweep) {
    Eigen::MatrixXd q(ns, na);
    for (Eigen::Index s = 0; s < ns; ++s)
      for (Eigen::Index a = 0; a < na; ++a) {
        const std::size_t p = mdp.pair(static_cast<std::size_t>(s),
                                       static_cast<std::size_t>(a));
        q(s, a) = mdp.reward[p] +
                  gamma * v(static_cast<Eigen::Index>(mdp.next[p]));
      }
    const double change = (q - out.q).cwiseAbs().maxCoeff();
    out.q = std::move(q);
    v = out.q.rowwise().maxCoeff();
    out.changes.push_back(change);
    ++out.sweeps;
    if (change < tol) break;
  }
  return out;
}

double max_abs_error(const QFunction& q, const TinyMdp& mdp,
                     const Eigen::MatrixXd& q_star) {
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.states.size(); ++s) {
    const Eigen::VectorXd values = q.all_values(mdp.states[s]);
    for (std::size_t a = 0; a < mdp.actions; ++a) {
      worst = std::max(worst, std::abs(values(static_cast<Eigen::Index>(a)) -
                                       q_star(static_cast<Eigen::Index>(s),
                                              static_cast<Eigen::Index>(a))));
    }
  }
  return worst;
}

}  // namespace covmpg
