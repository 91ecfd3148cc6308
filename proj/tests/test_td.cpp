#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aliased_ac/error.hpp"
#include "aliased_ac/td.hpp"

using namespace aliased_ac;

namespace {

struct Tiger {
  Pomdp pomdp = builtin_tiger(0.9);
  AgentStateProcess asp = make_last_observation(pomdp);
  TabularPolicy enter = resolve_policy("enter_always", pomdp, asp);
  VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, enter), 0.9);
};

double rms_error(const Tiger& t, CriticMode mode, const QTable& target, std::int64_t K, int seeds) {
  TdConfig config;
  config.mode = mode;
  config.K = K;
  const FeatureMap f = tabular_features(feature_rows(mode, 4, 3, 2));
  const CriticOracle oracle = make_oracle(target, t.d, t.enter);
  double sum = 0.0;
  for (int i = 0; i < seeds; ++i) {
    Rng rng(100 + i);
    const TdResult r = td_learn(t.pomdp, t.asp, t.enter, f, config, rng, &oracle);
    sum += *r.trace.final_error * *r.trace.final_error;
  }
  return std::sqrt(sum / seeds);
}

}  // namespace

TEST_CASE("projection") {
  Vector v(2);
  v << 3.0, 4.0;
  const Vector p = project_ball(v, 2.5);
  CHECK(p[0] == doctest::Approx(1.5));
  CHECK(p[1] == doctest::Approx(2.0));
  CHECK(project_ball(v, 10.0) == v);
}

TEST_CASE("semi-gradient of a hand segment") {
  const Tiger t;
  LinearCritic critic = make_critic(tabular_features(24), CriticMode::asymmetric, 15.0, 4, 3, 2);
  critic.beta = Vector::Ones(24);
  Segment seg;
  seg.steps = {{0, 0, 0, 1.0}, {0, 0, 1, 0.5}};
  seg.state = 0;
  seg.agent_state = 0;
  seg.action = 1;
  const SemiGradient g = td_semi_gradient(critic, seg, 0.9);
  CHECK(g.delta == doctest::Approx(1.26).epsilon(1e-12));
  CHECK(g.g[critic.row(0, 0, 0)] == doctest::Approx(1.26).epsilon(1e-12));
  CHECK(g.g.norm() == doctest::Approx(1.26).epsilon(1e-12));

  LinearCritic sym = make_critic(tabular_features(6), CriticMode::symmetric, 15.0, 4, 3, 2);
  CHECK(sym.row(3, 2, 1) == 5);
}

TEST_CASE("config validation") {
  TdConfig c;
  CHECK(c.step_size() == doctest::Approx(1.0 / std::sqrt(1000.0)));
  c.alpha = 0.05;
  CHECK(c.step_size() == 0.05);
  c.K = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.K = 10;
  c.m = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.m = 1;
  c.radius = -1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("segments follow the policy") {
  const Tiger t;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Segment s = sample_segment(t.pomdp, t.asp, t.enter, 3, rng);
    CHECK(s.steps.size() == 3);
    for (const auto& step : s.steps) CHECK(step.action == 1);
    CHECK(s.action == 1);
  }
}

TEST_CASE("asymmetric TD approaches Q") {
  const Tiger t;
  const QTable q = asymmetric_q_exact(t.pomdp, t.asp, t.enter);
  const double e3 = rms_error(t, CriticMode::asymmetric, q, 1000, 4);
  const double e5 = rms_error(t, CriticMode::asymmetric, q, 100000, 4);
  CHECK(e5 < e3);
  CHECK(e5 < 1.0);
}

TEST_CASE("symmetric TD approaches the fixed point") {
  const Tiger t;
  const QTable qt = symmetric_fixed_point(t.pomdp, t.asp, t.enter, 1, t.d);
  const double e3 = rms_error(t, CriticMode::symmetric, qt, 1000, 4);
  const double e5 = rms_error(t, CriticMode::symmetric, qt, 100000, 4);
  CHECK(e5 < e3);
  CHECK(e5 < 0.5);
}

TEST_CASE("td runs are reproducible and traced") {
  const Tiger t;
  TdConfig config;
  config.K = 500;
  config.eval_every = 100;
  const FeatureMap f = tabular_features(24);
  const QTable q = asymmetric_q_exact(t.pomdp, t.asp, t.enter);
  const CriticOracle oracle = make_oracle(q, t.d, t.enter);
  Rng a(7), b(7);
  const TdResult ra = td_learn(t.pomdp, t.asp, t.enter, f, config, a, &oracle);
  const TdResult rb = td_learn(t.pomdp, t.asp, t.enter, f, config, b, &oracle);
  CHECK(ra.critic.beta == rb.critic.beta);
  CHECK(ra.critic.beta.norm() <= 15.0 + 1e-12);
  std::ostringstream sa, sb;
  write_csv(sa, ra.trace);
  write_csv(sb, rb.trace);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("k,delta,g_norm,beta_norm,measured_error\n", 0) == 0);
  CHECK(ra.trace.records.front().beta_norm == 0.0);
}
