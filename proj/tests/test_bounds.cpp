#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aliased_ac/bounds.hpp"
#include "aliased_ac/error.hpp"

using namespace aliased_ac;

TEST_CASE("closed-form terms") {
  Vector mu(3), nu(3);
  mu << 0.5, 0.5, 0.0;
  nu << 0.1, 0.5, 0.4;
  CHECK(tv_distance(mu, nu) == doctest::Approx(0.4));
  CHECK_THROWS_AS(tv_distance(mu, Vector::Zero(2)), ValidationError);
  CHECK(eps_td(1, 1.0, 0.0, 1) == doctest::Approx(std::sqrt(6.5)));
  // h = 10 + 30 = 40, (900 + 1600) / (2 * 100 * 0.1)
  CHECK(eps_td(10000, 15.0, 0.9, 1) == doctest::Approx(std::sqrt(125.0)));
  CHECK(eps_app(1.0, 0.5, 1) == doctest::Approx(3.0));
  CHECK(eps_app(0.0, 0.9, 1) == 0.0);
  CHECK(eps_shift(1.0, 0.5, 1, 0.25) == doctest::Approx(3.0));
  CHECK(eps_shift(15.0, 0.9, 2, 0.0) == 0.0);
  CHECK(eps_nac(4, 1.0, 2) == doctest::Approx((1.0 + 2.0 * std::log(2.0)) / 4.0));
  CHECK(eps_actor(1, 1.0, 0.5) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("concentrability") {
  Vector a(3), b(3);
  a << 0.5, 0.5, 0.0;
  b << 0.25, 0.25, 0.5;
  CHECK(concentrability(a, b).value == doctest::Approx(2.0));
  b << 0.5, 0.0, 0.5;
  CHECK(concentrability(a, b).infinite);
}

TEST_CASE("aliasing lemma on tiger") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess u = make_last_observation(p);
  const TabularPolicy enter = resolve_policy("enter_always", p, u);
  const double lhs[3] = {1.0062305898749055, 0.905608, 0.733542};
  const double rhs[3] = {0.991358, 0.905410, 0.733542};
  int i = 0;
  for (int m : {1, 2, 4}) {
    const AliasingLemmaCheck c = aliasing_lemma_check(p, u, enter, m);
    CHECK(c.lhs == doctest::Approx(lhs[i]).epsilon(1e-5));
    CHECK(c.rhs == doctest::Approx(rhs[i]).epsilon(1e-5));
    CHECK(c.tail == doctest::Approx(std::pow(0.9, 41 * m) / 0.1).epsilon(1e-9));
    CHECK(c.holds);
    ++i;
  }
}

TEST_CASE("state-revealing wrapper zeroes the aliasing terms") {
  const auto [p, u] = make_state_revealing(builtin_tiger(0.9));
  const TabularPolicy uniform = TabularPolicy::uniform(4, 2);
  for (int m : {1, 2, 4}) {
    CHECK(eps_alias(p, u, uniform, m).value == 0.0);
    CHECK(eps_inf(p, u, uniform, CriticMode::symmetric).value == 0.0);
  }
  const Pomdp tiger = builtin_tiger(0.9);
  const AgentStateProcess last = make_last_observation(tiger);
  const TabularPolicy enter = resolve_policy("enter_always", tiger, last);
  CHECK(eps_inf(tiger, last, enter, CriticMode::asymmetric).value == 0.0);
  CHECK(eps_inf(tiger, last, enter, CriticMode::symmetric).value > 0.0);
}

TEST_CASE("critic bound terms and report") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess u = make_last_observation(p);
  const TabularPolicy enter = resolve_policy("enter_always", p, u);
  TdConfig config;
  config.K = 10000;
  const CriticBoundTerms asym = critic_bound_terms(p, u, enter, tabular_features(24), config);
  CHECK(asym.eps_td == doctest::Approx(std::sqrt(125.0)));
  CHECK(asym.eps_app == 0.0);
  CHECK(asym.eps_alias == 0.0);
  CHECK(asym.eps_shift > 0.0);

  CHECK_THROWS_AS(bound_report_td({1.0}, asym, config, 0.9, GapConditioning::initial_distribution), ValidationError);
  const BoundReport r = bound_report_td({1.0, 2.0}, asym, config, 0.9, GapConditioning::initial_distribution);
  CHECK(r.measured_lhs == doctest::Approx(std::sqrt(2.5)));
  CHECK(r.rhs_total == doctest::Approx(asym.total()));
  CHECK(r.holds);
  std::ostringstream csv;
  write_csv(csv, std::vector<BoundReport>{r});
  CHECK(csv.str().rfind("mode,K,m,B,gamma,n_seeds,eps_td,eps_app,eps_shift,eps_alias,alias_tail,rhs_total,"
                        "measured_lhs,measured_stderr,holds,conditioning\n",
                        0) == 0);

  config.mode = CriticMode::symmetric;
  const CriticBoundTerms sym = critic_bound_terms(p, u, enter, tabular_features(6), config);
  CHECK(sym.eps_alias > 0.0);
  CHECK(sym.eps_app == 0.0);
}

TEST_CASE("agent-state norm refuses undefined visited entries") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess u = make_last_observation(p);
  const TabularPolicy enter = resolve_policy("enter_always", p, u);
  const VisitationMeasure d = discounted_visitation(build_joint_chain(p, u, enter), 0.9);
  Vector f(3);
  f << 1.0, std::nan(""), 0.0;
  CHECK_THROWS_AS(agent_state_norm(f, d), ValidationError);
  f << 1.0, 1.0, 1.0;
  CHECK(agent_state_norm(f, d) == doctest::Approx(1.0));
}
