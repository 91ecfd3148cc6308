#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/rng.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

/// Agent-state policy pi(a|z) as a |Z| x |A| row-stochastic table.
class TabularPolicy {
 public:
  explicit TabularPolicy(RowMatrix probs);

  static TabularPolicy uniform(int n_agent_states, int n_actions);
  /// One action per agent state.
  static TabularPolicy deterministic(const std::vector<int>& actions, int n_actions);
  static TabularPolicy random(int n_agent_states, int n_actions, std::uint64_t seed);

  int n_agent_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  double operator()(int z, int a) const { return probs_(z, a); }
  std::span<const double> row(int z) const { return row_span(probs_, z); }
  const RowMatrix& table() const { return probs_; }

 private:
  RowMatrix probs_;
};

/// a ~ pi(.|z). One draw.
inline int sample_action(const TabularPolicy& policy, int z, Rng& rng) { return rng.categorical(policy.row(z)); }

/// Resolves "uniform", "<action label>_always" (e.g. "enter_always", label
/// matched case-insensitively), "always:<action index>" or a JSON file holding
/// a [z][a] table.
TabularPolicy resolve_policy(const std::string& spec, const Pomdp& pomdp, const AgentStateProcess& asp);

}  // namespace aliased_ac
