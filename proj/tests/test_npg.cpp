#include <doctest.h>

#include <cmath>

#include "aliased_ac/npg.hpp"
#include "aliased_ac/rng.hpp"

using namespace aliased_ac;

namespace {

Vector random_theta(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vector theta(n);
  for (int i = 0; i < n; ++i) theta[i] = rng.normal();
  return theta;
}

}  // namespace

TEST_CASE("softmax probabilities and score") {
  const LogLinearPolicy pi(tabular_features(6), 3, 2, random_theta(6, 1));
  for (int z = 0; z < 3; ++z) {
    const Vector p = pi.action_probs(z);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < 2; ++a) {
      const Vector score = pi.score(z, a);
      for (int i = 0; i < 6; ++i) {
        LogLinearPolicy plus = pi, minus = pi;
        Vector tp = pi.theta(), tm = pi.theta();
        tp[i] += 1e-6;
        tm[i] -= 1e-6;
        plus.set_theta(tp);
        minus.set_theta(tm);
        const double fd = (std::log(plus.action_probs(z)[a]) - std::log(minus.action_probs(z)[a])) / 2e-6;
        CHECK(score[i] == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
  // large logits do not overflow
  Vector big = Vector::Zero(6);
  big[0] = 1000.0;
  const LogLinearPolicy sharp(tabular_features(6), 3, 2, big);
  CHECK(sharp.action_probs(0)[0] == doctest::Approx(1.0));
}

TEST_CASE("natural gradient identity on random instances") {
  for (std::uint64_t seed : {1u, 2u}) {
    const Pomdp p = random_pomdp(3, 2, 2, 0.9, seed);
    const AgentStateProcess u = random_agent_state_process(2, 2, 2, seed);
    const LogLinearPolicy pi(tabular_features(4), 2, 2, random_theta(4, seed));
    const Vector grad = finite_difference_gradient(pi, p, u);
    const Vector w = exact_npg(pi, p, u);
    const VisitationMeasure d = discounted_visitation(build_joint_chain(p, u, pi.to_table()), 0.9);
    const Eigen::MatrixXd F = fisher_matrix(pi, d);
    CHECK(((F * w) - 0.1 * grad).lpNorm<Eigen::Infinity>() <= 1e-5);
    const NpgNormalEquations eq = npg_normal_equations(pi, p, u);
    CHECK((eq.rhs_asymmetric - eq.rhs_symmetric).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((eq.rhs_symmetric - 0.1 * grad).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
}

TEST_CASE("pseudo inverse drops null directions") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 1.0, 1.0, 1.0;
  Vector rhs(2);
  rhs << 2.0, 2.0;
  const Vector x = pseudo_inverse_solve(m, rhs);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("inner gradient and advantages") {
  const LogLinearPolicy pi(tabular_features(6), 3, 2, random_theta(6, 3));
  Vector w = random_theta(6, 4);
  const Vector g = npg_inner_gradient(pi, w, 1, 0, 0.7);
  const Vector score = pi.score(1, 0);
  CHECK((g - 2.0 * (score.dot(w) - 0.7) * score).norm() < 1e-12);

  LinearCritic critic = make_critic(tabular_features(6), CriticMode::symmetric, 25.0, 4, 3, 2);
  critic.beta = random_theta(6, 5);
  const Vector adv = advantage_table(critic, pi.to_table());
  for (int z = 0; z < 3; ++z) {
    const Vector p = pi.action_probs(z);
    CHECK(p[0] * adv[z * 2] + p[1] * adv[z * 2 + 1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(advantage_from_critic(critic, pi, 0, z, 1) == doctest::Approx(adv[z * 2 + 1]).epsilon(1e-12));
  }
}

TEST_CASE("natural actor-critic improves on tiger") {
  const Pomdp p = builtin_tiger(0.9);
  const AgentStateProcess u = make_last_observation(p);
  NacConfig config;
  config.T = 20;
  config.N = 500;
  config.td.K = 5000;
  config.measure_critic = false;
  Rng a(1), b(1);
  const NacResult r = nac_run(p, u, tabular_features(24), tabular_features(6), config, a);
  CHECK(r.trace.records.size() == 20);
  double best = -1e9;
  for (const auto& rec : r.trace.records) best = std::max(best, rec.J);
  CHECK(best > r.trace.records.front().J);
  const NacResult again = nac_run(p, u, tabular_features(24), tabular_features(6), config, b);
  CHECK(again.trace.final_theta == r.trace.final_theta);
  CHECK(r.trace.final_theta.norm() > 0.0);
}
