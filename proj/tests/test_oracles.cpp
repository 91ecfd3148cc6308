#include <doctest.h>

#include <cmath>

#include "aliased_ac/oracles.hpp"
#include "aliased_ac/rng.hpp"
#include "oracle.hpp"

using namespace aliased_ac;

namespace {

struct Tiger {
  Pomdp pomdp = builtin_tiger(0.9);
  AgentStateProcess asp = make_last_observation(pomdp);
  TabularPolicy enter = resolve_policy("enter_always", pomdp, asp);
};

}  // namespace

TEST_CASE("tiger closed forms") {
  const Tiger t;
  const double g = 0.9;
  const JointChain chain = build_joint_chain(t.pomdp, t.asp, t.enter);
  const VisitationMeasure d = discounted_visitation(chain, g);
  const QTable q = symmetric_q_true(t.pomdp, t.asp, t.enter, d);
  const QTable qt = symmetric_fixed_point(t.pomdp, t.asp, t.enter, 1, d);
  const double v[3] = {1 / (2 * (1 - g)), g / (1 - g), 0.0};
  const double vt[3] = {1 / (2 * (1 - g)), g / (2 * (1 - g)), g / (2 * (1 - g))};
  for (int z = 0; z < 3; ++z) {
    CHECK(std::abs(q.state_value(z, t.enter) - v[z]) <= 1e-8);
    CHECK(std::abs(qt.state_value(z, t.enter) - vt[z]) <= 1e-8);
  }
  CHECK(exact_return(t.pomdp, t.asp, t.enter) == doctest::Approx(4.75).epsilon(1e-12));
  CHECK(exact_return_via_q(t.pomdp, t.asp, t.enter) == doctest::Approx(4.75).epsilon(1e-12));
  CHECK(weighted_distance(q, qt, d, t.enter) == doctest::Approx(1.0062305898749055).epsilon(1e-10));
}

TEST_CASE("tiger brute force optimum") {
  const Tiger t;
  const OptimalPolicy best = brute_force_optimal(t.pomdp, t.asp);
  CHECK(best.value == doctest::Approx(6.775).epsilon(1e-12));
  CHECK(best.actions == std::vector<int>{0, 1, 0});
}

TEST_CASE("visitation and Q match iterative references") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Pomdp p = random_pomdp(3, 2, 2, 0.8, seed);
    const AgentStateProcess u = random_agent_state_process(2, 2, 2, seed + 10);
    const TabularPolicy pi = TabularPolicy::random(2, 2, seed + 20);
    const JointChain chain = build_joint_chain(p, u, pi);
    const VisitationMeasure d = discounted_visitation(chain, p.gamma());
    const std::vector<double> d_ref = ref::visitation(p, u, pi);
    for (int i = 0; i < chain.size(); ++i) CHECK(d.weights[i] == doctest::Approx(d_ref[i]).epsilon(1e-10));

    const QTable q = asymmetric_q_exact(p, u, pi);
    const std::vector<double> q_ref = ref::q_asym(p, u, pi);
    for (int i = 0; i < static_cast<int>(q_ref.size()); ++i) {
      CHECK(q.values()[i] == doctest::Approx(q_ref[i]).epsilon(1e-9));
    }
    for (int m : {1, 2, 3}) {
      const QTable qt = symmetric_fixed_point(p, u, pi, m, d);
      const std::vector<double> qt_ref = ref::q_sym_fixed(p, u, pi, m);
      for (int i = 0; i < static_cast<int>(qt_ref.size()); ++i) {
        CHECK(qt.values()[i] == doctest::Approx(qt_ref[i]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("symmetric Bellman contraction") {
  const Pomdp p = random_pomdp(3, 2, 2, 0.9, 7);
  const AgentStateProcess u = make_last_observation(p);
  const TabularPolicy pi = TabularPolicy::uniform(2, 2);
  const StateActionModel model = build_state_action_model(p, u, pi);
  const VisitationMeasure d = discounted_visitation(build_joint_chain(p, u, pi), p.gamma());
  Rng rng(1);
  for (int m : {1, 2, 4}) {
    const SymmetricBellman op(model, d, m);
    for (int trial = 0; trial < 20; ++trial) {
      Vector a(4), b(4);
      for (int i = 0; i < 4; ++i) {
        a[i] = 10 * rng.normal();
        b[i] = 10 * rng.normal();
      }
      const double ratio = (op.apply(a) - op.apply(b)).lpNorm<Eigen::Infinity>() / (a - b).lpNorm<Eigen::Infinity>();
      CHECK(ratio <= std::pow(0.9, m) + 1e-10);
    }
  }
}

TEST_CASE("discounted sampler matches visitation") {
  const Tiger t;
  const VisitationMeasure d = discounted_visitation(build_joint_chain(t.pomdp, t.asp, t.enter), 0.9);
  Rng rng(5);
  std::vector<double> counts(12, 0.0);
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const DiscountedSample x = sample_discounted(t.pomdp, t.asp, t.enter, rng);
    counts[x.state * 3 + x.agent_state] += 1.0 / n;
  }
  for (int i = 0; i < 12; ++i) CHECK(std::abs(counts[i] - d.weights[i]) < 5e-3);
}

TEST_CASE("approximate beliefs") {
  const Tiger t;
  const JointChain chain = build_joint_chain(t.pomdp, t.asp, t.enter);
  const RowMatrix b0 = approximate_beliefs(chain, 0);
  // Z_0 = Dark: Treasure or Tiger with equal weight
  CHECK(b0(0, 0) == doctest::Approx(0.5));
  CHECK(b0(0, 1) == doctest::Approx(0.5));
  CHECK(b0(1, 2) == doctest::Approx(1.0));
  const RowMatrix b1 = approximate_beliefs(chain, 1);
  // after one Enter everyone sees Dark
  CHECK(std::isnan(b1(1, 0)));
  CHECK(b1(0, 0) == doctest::Approx(0.5));
}
