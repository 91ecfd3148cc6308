#include <doctest.h>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/error.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/rng.hpp"

using namespace aliased_ac;

TEST_CASE("last observation process") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess u = make_last_observation(p);
  CHECK(u.n_agent_states() == 3);
  CHECK(u.deterministic());
  CHECK(u.labels() == std::vector<std::string>{"Dark", "Left", "Right"});
  for (int z = 0; z < 3; ++z) {
    for (int a = 0; a < 2; ++a) {
      for (int o = 0; o < 3; ++o) CHECK(u.next_deterministic(z, a, o) == o);
    }
  }
  for (int o = 0; o < 3; ++o) CHECK(u.U(o, u.null_state(), u.null_action(), o) == 1.0);
}

TEST_CASE("sliding window sizes and codec") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess w1 = make_sliding_window(p, 1);
  CHECK(w1.n_agent_states() == 3);
  // 3 + 3 * (3 * 2)
  const AgentStateProcess w2 = make_sliding_window(p, 2);
  CHECK(w2.n_agent_states() == 21);
  CHECK(w2.deterministic());

  const WindowCodec codec(3, 2, 3);
  CHECK(codec.size() == 3 + 18 + 108);
  for (int i = 0; i < codec.size(); ++i) CHECK(codec.encode(codec.decode(i)) == i);

  CHECK_THROWS_AS(make_sliding_window(p, 0), ValidationError);
  CHECK_THROWS_AS(make_sliding_window(p, 12, 1000), Error);
}

TEST_CASE("window shift keeps the newest k observations") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess w = make_sliding_window(p, 2);
  Rng rng(0);
  int z = init_state(w, 1, rng);
  z = update(w, z, 0, 2, rng);
  const int z2 = update(w, z, 1, 0, rng);
  // (o=1) then (a=0, o=2) then (a=1, o=0) leaves the window (2, a=1, 0)
  int ref = init_state(w, 2, rng);
  ref = update(w, ref, 1, 0, rng);
  CHECK(z2 == ref);
  CHECK(rng.draws() == 0);
}

TEST_CASE("state revealing wrapper") {
  const Pomdp p = builtin_tiger(0.9);
  const auto [q, u] = make_state_revealing(p);
  CHECK(q.n_obs() == p.n_states());
  CHECK(u.n_agent_states() == p.n_states());
  for (int s = 0; s < p.n_states(); ++s) CHECK(q.O(s, s) == 1.0);
}

TEST_CASE("agent state json round trip") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess u = random_agent_state_process(2, 2, 3, 4);
  CHECK_FALSE(u.deterministic());
  const AgentStateProcess v = load_agent_state_process(to_json(u), p);
  CHECK(to_json(v) == to_json(u));
  CHECK_THROWS_AS(load_agent_state_process("{\"n_agent_states\": 2}", p), Error);
}
