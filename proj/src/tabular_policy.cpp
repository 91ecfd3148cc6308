#include "aliased_ac/tabular_policy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "aliased_ac/error.hpp"
#include "detail/json_io.hpp"
#include "detail/stochastic.hpp"

namespace aliased_ac {

TabularPolicy::TabularPolicy(RowMatrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() <= 0 || probs_.cols() <= 0) throw ValidationError("policy table must be non-empty");
  for (Eigen::Index z = 0; z < probs_.rows(); ++z) {
    detail::normalize_simplex(probs_.data() + z * probs_.cols(), static_cast<int>(probs_.cols()),
                              "policy[" + std::to_string(z) + "]");
  }
}

TabularPolicy TabularPolicy::uniform(int n_agent_states, int n_actions) {
  return TabularPolicy(RowMatrix::Constant(n_agent_states, n_actions, 1.0 / n_actions));
}

TabularPolicy TabularPolicy::deterministic(const std::vector<int>& actions, int n_actions) {
  RowMatrix probs = RowMatrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
  for (std::size_t z = 0; z < actions.size(); ++z) {
    if (actions[z] < 0 || actions[z] >= n_actions) throw ValidationError("action index out of range");
    probs(static_cast<Eigen::Index>(z), actions[z]) = 1.0;
  }
  return TabularPolicy(std::move(probs));
}

TabularPolicy TabularPolicy::random(int n_agent_states, int n_actions, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix probs(n_agent_states, n_actions);
  for (int z = 0; z < n_agent_states; ++z) {
    double total = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      probs(z, a) = -std::log(rng.uniform_positive());
      total += probs(z, a);
    }
    probs.row(z) /= total;
  }
  return TabularPolicy(std::move(probs));
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

TabularPolicy always(int action, const Pomdp& pomdp, const AgentStateProcess& asp) {
  if (action < 0 || action >= pomdp.n_actions()) throw ValidationError("action index out of range");
  return TabularPolicy::deterministic(std::vector<int>(static_cast<std::size_t>(asp.n_agent_states()), action),
                                      pomdp.n_actions());
}

}  // namespace

TabularPolicy resolve_policy(const std::string& spec, const Pomdp& pomdp, const AgentStateProcess& asp) {
  if (spec == "uniform") return TabularPolicy::uniform(asp.n_agent_states(), pomdp.n_actions());
  if (spec.rfind("always:", 0) == 0) return always(std::stoi(spec.substr(7)), pomdp, asp);
  const std::string suffix = "_always";
  if (spec.size() > suffix.size() && spec.compare(spec.size() - suffix.size(), suffix.size(), suffix) == 0) {
    const std::string name = lower(spec.substr(0, spec.size() - suffix.size()));
    const auto& actions = pomdp.labels().actions;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      if (lower(actions[a]) == name) return always(static_cast<int>(a), pomdp, asp);
    }
    throw ValidationError("unknown action label in policy '" + spec + "'");
  }
  const detail::JsonReader doc(detail::read_text_file(spec));
  RowMatrix probs = doc.matrix_node(doc.root(), "policy", asp.n_agent_states(), pomdp.n_actions());
  return TabularPolicy(std::move(probs));
}

}  // namespace aliased_ac
