#include <doctest.h>

#include <sstream>

#include "aliased_ac/error.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/rng.hpp"

using namespace aliased_ac;

TEST_CASE("tiger tables") {
  const Pomdp p = builtin_tiger(0.9);
  CHECK(p.n_states() == 4);
  CHECK(p.n_actions() == 2);
  CHECK(p.n_obs() == 3);
  CHECK(p.gamma() == 0.9);
  CHECK(p.state_index("Left") == 2);
  CHECK(p.action_index("Enter") == 1);
  CHECK(p.T(p.state_index("Left"), 1, p.state_index("Treasure")) == 1.0);
  CHECK(p.T(p.state_index("Right"), 0, p.state_index("Left")) == 1.0);
  CHECK(p.expected_reward(p.state_index("Treasure"), 0) == 1.0);
  CHECK(p.expected_reward(p.state_index("Left"), 1) == 0.0);
  CHECK(p.O(p.state_index("Tiger"), p.obs_index("Dark")) == 1.0);
}

TEST_CASE("json round trip is canonical") {
  const Pomdp p = random_pomdp(3, 2, 2, 0.8, 5);
  const std::string text = to_json(p);
  const Pomdp q = load_pomdp(text);
  CHECK(to_json(q) == text);
  for (int a = 0; a < 2; ++a) CHECK(p.transition(a).isApprox(q.transition(a), 0.0));
  CHECK(q.gamma() == 0.8);
}

TEST_CASE("malformed pomdp input") {
  CHECK_THROWS_AS(load_pomdp("{"), ParseError);
  const std::string tiger = to_json(builtin_tiger(0.9));

  std::string bad_gamma = tiger;
  const auto pos = bad_gamma.find("0.9");
  REQUIRE(pos != std::string::npos);
  bad_gamma.replace(pos, 3, "1.5");
  CHECK_THROWS_AS(load_pomdp(bad_gamma), ValidationError);
  CHECK_THROWS_AS(builtin_tiger(1.0), ValidationError);
  CHECK_THROWS_AS(resolve_pomdp("/nonexistent/model.json"), Error);
}

TEST_CASE("random pomdp rows are stochastic") {
  const Pomdp p = random_pomdp(4, 3, 2, 0.9, 11);
  CHECK(p.initial().sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int a = 0; a < 3; ++a) {
    for (int s = 0; s < 4; ++s) CHECK(p.transition(a).row(s).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(to_json(random_pomdp(4, 3, 2, 0.9, 11)) == to_json(p));
  CHECK(to_json(random_pomdp(4, 3, 2, 0.9, 12)) != to_json(p));
}

TEST_CASE("step consumes two draws and follows the model") {
  const Pomdp p = builtin_tiger(0.9);
  Rng rng(3);
  const auto before = rng.draws();
  const TransitionSample t = step(p, p.state_index("Left"), p.action_index("Enter"), rng);
  CHECK(rng.draws() - before == 2);
  CHECK(t.next_state == p.state_index("Treasure"));
  CHECK(t.observation == p.obs_index("Dark"));
  CHECK(t.reward == 0.0);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 0, 0) == derive_seed(1, 0, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
  Rng a(9), b(9);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
}
