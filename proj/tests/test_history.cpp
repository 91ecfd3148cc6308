#include <doctest.h>

#include "aliased_ac/error.hpp"
#include "aliased_ac/history.hpp"

using namespace aliased_ac;

TEST_CASE("belief filter on tiger") {
  const Pomdp p = builtin_tiger(0.9);
  History h;
  h.first_obs = p.obs_index("Left");
  Vector b = belief_filter(p, h);
  CHECK(b[p.state_index("Left")] == 1.0);
  h.steps.push_back({p.action_index("Swap"), p.obs_index("Right")});
  b = belief_filter(p, h);
  CHECK(b[p.state_index("Right")] == 1.0);
  h.steps.push_back({p.action_index("Enter"), p.obs_index("Dark")});
  b = belief_filter(p, h);
  CHECK(b[p.state_index("Tiger")] == 1.0);

  History dark;
  dark.first_obs = p.obs_index("Dark");
  b = belief_filter(p, dark);
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(0.5));

  h.steps.push_back({p.action_index("Enter"), p.obs_index("Left")});
  CHECK_THROWS_AS(belief_filter(p, h), ZeroLikelihoodError);
}

TEST_CASE("belief gap on tiger") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess u = make_last_observation(p);
  const TabularPolicy enter = resolve_policy("enter_always", p, u);
  BeliefGapOptions options;
  options.horizon = 10;
  const BeliefGapResult r = expected_belief_gap(p, u, enter, options);
  // Left and Right histories are fully informative at every step; after
  // Enter the approximate belief over Dark is the 50/50 mixture while the
  // filter knows the absorbing state.
  CHECK(r.per_agent_state[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.per_agent_state[1] > 0.0);
  CHECK(r.per_agent_state[1] == doctest::Approx(r.per_agent_state[2]).epsilon(1e-12));
  double expected = 0.0;
  for (int k = 1; k <= 10; ++k) expected += 0.5 * std::pow(0.9, k);
  CHECK(r.per_agent_state[1] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.tail == doctest::Approx(std::pow(0.9, 11) / 0.1));
  CHECK_FALSE(r.monte_carlo);

  options.node_cap = 1;
  CHECK_THROWS_AS(expected_belief_gap(p, u, enter, options), CapExceededError);
  options.monte_carlo_fallback = true;
  options.monte_carlo_episodes = 20000;
  const BeliefGapResult mc = expected_belief_gap(p, u, enter, options);
  CHECK(mc.monte_carlo);
  CHECK(mc.per_agent_state[1] == doctest::Approx(expected).epsilon(1e-9));
}
