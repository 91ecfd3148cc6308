#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/oracles.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/tabular_policy.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

/// h_t = (o_0, a_0, o_1, ..., a_{t-1}, o_t).
struct History {
  int first_obs = 0;
  std::vector<std::pair<int, int>> steps;  // (a_i, o_{i+1})
};

/// Forward filter b_t(s | h_t) from the initial distribution P.
/// Throws ZeroLikelihoodError for impossible histories.
Vector belief_filter(const Pomdp& pomdp, const History& history);

/// One predict-update step: b'(s') ∝ sum_s b(s) T(s'|s,a) O(o'|s').
Vector belief_update(const Pomdp& pomdp, const Vector& belief, int action, int obs);

/// How the inner expectation E[. | Z_0 = z] of the belief-gap sums starts.
enum class GapConditioning {
  /// (S_0, Z_0) ~ P(s0, z0) conditioned on Z_0 = z; b_t is the filter from P
  /// and b_hat_t is the time-t approximate belief of the chain started at P.
  initial_distribution,
  /// S_0 ~ d(.|z); b_t is the filter started from d(.|z) and b_hat is the
  /// discounted-visitation conditional d(.|Z_t) at every t.
  visitation,
};

struct BeliefGapOptions {
  int horizon = 40;       // largest k in the truncated sum
  int stride = 1;         // m: the sum runs over times k * stride
  double discount = 0.9;  // per-unit-time factor; term k is weighted discount^(k*stride)
  GapConditioning conditioning = GapConditioning::initial_distribution;
  std::int64_t node_cap = 200000;  // live histories per time step
  bool monte_carlo_fallback = false;
  int monte_carlo_episodes = 100000;
  std::uint64_t seed = 0;
};

struct BeliefGapResult {
  /// E[sum_{k<=horizon} discount^{k m} TV(b_hat_{km}, b_{km}) | Z_0 = z];
  /// NaN where the conditioning event has probability zero.
  Vector per_agent_state;
  /// Same sum without conditioning (start distribution P).
  double unconditional = 0.0;
  /// discount^{(horizon+1) m} / (1 - discount^m): bound on the omitted tail.
  double tail = 0.0;
  bool monte_carlo = false;
  std::int64_t peak_nodes = 0;
};

/// Evaluates the belief-gap sums by exact enumeration of histories with
/// positive probability (histories with identical filter state are merged),
/// or by Monte Carlo when the node cap is hit and the fallback is enabled.
BeliefGapResult expected_belief_gap(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                                    const BeliefGapOptions& options, const VisitationMeasure* d = nullptr);

}  // namespace aliased_ac
