#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "aliased_ac/bounds.hpp"
#include "aliased_ac/error.hpp"
#include "aliased_ac/harness.hpp"

namespace py = pybind11;
using namespace aliased_ac;

namespace {

CriticMode mode_arg(const std::string& mode) { return parse_mode(mode); }

py::dict q_dict(const QTable& q) {
  py::dict out;
  out["values"] = q.values();
  out["symmetric"] = q.symmetric();
  if (q.symmetric()) {
    out["shape"] = py::make_tuple(q.n_agent_states(), q.n_actions());
  } else {
    out["shape"] = py::make_tuple(q.n_states(), q.n_agent_states(), q.n_actions());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tabular POMDPs, asymmetric and symmetric TD, natural actor-critic and bound calculators";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<Pomdp>(m, "Pomdp")
      .def_property_readonly("n_states", &Pomdp::n_states)
      .def_property_readonly("n_actions", &Pomdp::n_actions)
      .def_property_readonly("n_obs", &Pomdp::n_obs)
      .def_property_readonly("gamma", &Pomdp::gamma)
      .def_property_readonly("initial", &Pomdp::initial)
      .def("transition", &Pomdp::transition, py::arg("action"))
      .def_property_readonly("observation", &Pomdp::observation)
      .def("with_gamma", &Pomdp::with_gamma)
      .def("to_json", [](const Pomdp& p) { return to_json(p); });

  m.def("tiger", &builtin_tiger, py::arg("gamma") = 0.9);
  m.def("load_pomdp", [](const std::string& text) { return load_pomdp(text); }, py::arg("json_text"));
  m.def("random_pomdp", &random_pomdp, py::arg("n_states"), py::arg("n_actions"), py::arg("n_obs"),
        py::arg("gamma"), py::arg("seed"));

  py::class_<AgentStateProcess>(m, "AgentStateProcess")
      .def_property_readonly("n_agent_states", &AgentStateProcess::n_agent_states)
      .def_property_readonly("labels", &AgentStateProcess::labels)
      .def_property_readonly("deterministic", &AgentStateProcess::deterministic);

  m.def("last_observation", &make_last_observation);
  m.def("sliding_window", [](const Pomdp& p, int k) { return make_sliding_window(p, k); }, py::arg("pomdp"),
        py::arg("k"));
  m.def("state_revealing", &make_state_revealing, "returns (wrapped POMDP, agent state)");

  py::class_<TabularPolicy>(m, "TabularPolicy")
      .def(py::init<RowMatrix>(), py::arg("probs"))
      .def_static("uniform", &TabularPolicy::uniform)
      .def_static("deterministic", &TabularPolicy::deterministic, py::arg("actions"), py::arg("n_actions"))
      .def_property_readonly("table", &TabularPolicy::table);
  m.def("resolve_policy", &resolve_policy, py::arg("spec"), py::arg("pomdp"), py::arg("agent_state"));

  m.def(
      "visitation",
      [](const Pomdp& p, const AgentStateProcess& asp, const TabularPolicy& pi) {
        return discounted_visitation(build_joint_chain(p, asp, pi), p.gamma()).weights;
      },
      "discounted visitation over (s, z), flat index s * Z + z");
  m.def(
      "exact_tables",
      [](const Pomdp& p, const AgentStateProcess& asp, const TabularPolicy& pi, int m_step) {
        const ExactTables t = exact_tables(p, asp, pi, m_step);
        py::dict out;
        out["visitation"] = t.d.weights;
        out["q_asym"] = q_dict(t.q_asym);
        out["q_sym"] = q_dict(t.q_sym);
        out["q_tilde"] = q_dict(t.q_tilde);
        out["J"] = t.J;
        out["aliasing_gap"] = weighted_distance(t.q_sym, t.q_tilde, t.d, pi);
        return out;
      },
      py::arg("pomdp"), py::arg("agent_state"), py::arg("policy"), py::arg("m") = 1);
  m.def("exact_return", &exact_return);
  m.def(
      "brute_force_optimal",
      [](const Pomdp& p, const AgentStateProcess& asp) {
        const OptimalPolicy best = brute_force_optimal(p, asp);
        return py::make_tuple(best.value, best.actions);
      },
      "returns (J*, actions per agent state)");

  m.def(
      "td_learn",
      [](const Pomdp& p, const AgentStateProcess& asp, const TabularPolicy& pi, const std::string& mode, int m_step,
         std::int64_t K, double B, std::uint64_t seed) {
        TdConfig config;
        config.mode = mode_arg(mode);
        config.m = m_step;
        config.K = K;
        config.radius = B;
        config.seed = seed;
        const FeatureMap features =
            tabular_features(feature_rows(config.mode, p.n_states(), asp.n_agent_states(), p.n_actions()));
        const ExactTables t = exact_tables(p, asp, pi, m_step);
        const CriticOracle oracle =
            make_oracle(config.mode == CriticMode::asymmetric ? t.q_asym : t.q_sym, t.d, pi);
        Rng rng(seed);
        const TdResult r = td_learn(p, asp, pi, features, config, rng, &oracle);
        py::dict out;
        out["beta_bar"] = r.critic.beta;
        out["error"] = *r.trace.final_error;
        if (config.mode == CriticMode::symmetric) {
          out["error_fixed_point"] = measured_critic_error(r.critic, t.q_tilde, t.d, pi);
        }
        return out;
      },
      "tabular-feature TD run", py::arg("pomdp"), py::arg("agent_state"), py::arg("policy"), py::arg("mode") = "asym",
      py::arg("m") = 1, py::arg("K") = 10000, py::arg("B") = 15.0, py::arg("seed") = 0);

  m.def(
      "nac_run",
      [](const Pomdp& p, const AgentStateProcess& asp, const std::string& mode, int T, int N, std::int64_t K,
         double B, std::uint64_t seed) {
        NacConfig config;
        config.mode = mode_arg(mode);
        config.T = T;
        config.N = N;
        config.td.K = K;
        config.radius = B;
        config.seed = seed;
        config.measure_critic = false;
        const FeatureMap phi =
            tabular_features(feature_rows(config.mode, p.n_states(), asp.n_agent_states(), p.n_actions()));
        const FeatureMap psi = tabular_features(asp.n_agent_states() * p.n_actions());
        Rng rng(seed);
        const NacResult r = nac_run(p, asp, phi, psi, config, rng);
        std::vector<double> J;
        for (const auto& rec : r.trace.records) J.push_back(rec.J);
        py::dict out;
        out["J"] = J;
        out["theta"] = r.trace.final_theta;
        out["policy"] = r.policy.to_table().table();
        return out;
      },
      "tabular-feature natural actor-critic run", py::arg("pomdp"), py::arg("agent_state"), py::arg("mode") = "asym",
      py::arg("T") = 50, py::arg("N") = 2000, py::arg("K") = 50000, py::arg("B") = 25.0, py::arg("seed") = 0);

  m.def("tv_distance", &tv_distance);
  m.def("eps_td", &eps_td, py::arg("K"), py::arg("B"), py::arg("gamma"), py::arg("m"));
  m.def("eps_shift", &eps_shift, py::arg("B"), py::arg("gamma"), py::arg("m"), py::arg("tv"));
  m.def("eps_nac", &eps_nac, py::arg("T"), py::arg("B"), py::arg("n_actions"));
  m.def("eps_actor", &eps_actor, py::arg("N"), py::arg("B"), py::arg("gamma"));
  m.def(
      "eps_alias",
      [](const Pomdp& p, const AgentStateProcess& asp, const TabularPolicy& pi, int m_step, int horizon) {
        AliasOptions options;
        options.horizon = horizon;
        const TruncatedValue v = eps_alias(p, asp, pi, m_step, options);
        return py::make_tuple(v.value, v.tail);
      },
      "returns (value, tail bound)", py::arg("pomdp"), py::arg("agent_state"), py::arg("policy"), py::arg("m") = 1,
      py::arg("horizon") = 40);
  m.def(
      "aliasing_lemma_check",
      [](const Pomdp& p, const AgentStateProcess& asp, const TabularPolicy& pi, int m_step, int horizon) {
        AliasOptions options;
        options.horizon = horizon;
        const AliasingLemmaCheck c = aliasing_lemma_check(p, asp, pi, m_step, options);
        py::dict out;
        out["lhs"] = c.lhs;
        out["rhs"] = c.rhs;
        out["tail"] = c.tail;
        out["holds"] = c.holds;
        return out;
      },
      py::arg("pomdp"), py::arg("agent_state"), py::arg("policy"), py::arg("m") = 1, py::arg("horizon") = 40);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"aliased-ac"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      "runs the command-line tool in-process; returns (exit code, stdout, stderr)", py::arg("args"));
}
