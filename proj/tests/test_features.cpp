#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aliased_ac/error.hpp"
#include "aliased_ac/features.hpp"
#include "aliased_ac/rng.hpp"

using namespace aliased_ac;

TEST_CASE("feature maps") {
  const FeatureMap t = tabular_features(4);
  CHECK(t.n_rows() == 4);
  CHECK(t.dim() == 4);
  CHECK(t(2)[2] == 1.0);
  const FeatureMap r = random_features(10, 3, 1);
  for (int i = 0; i < 10; ++i) CHECK(r.table().row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(random_features(10, 3, 1).table() == r.table());
  CHECK_THROWS_AS(FeatureMap(RowMatrix::Constant(2, 2, 1.0), FeatureKind::custom_table), ValidationError);
  CHECK(feature_rows(CriticMode::asymmetric, 4, 3, 2) == 24);
  CHECK(feature_rows(CriticMode::symmetric, 4, 3, 2) == 6);
}

TEST_CASE("feature csv round trip") {
  const FeatureMap r = random_features(5, 2, 8);
  std::stringstream buf;
  write_csv(buf, r);
  const FeatureMap back = read_feature_csv(buf);
  CHECK(back.table() == r.table());
  std::istringstream bad("row_index,component_index,value\n0,0,abc\n");
  CHECK_THROWS_AS(read_feature_csv(bad), Error);
  CHECK_THROWS_AS(resolve_features("random:0", 4), Error);
  CHECK(resolve_features("random:3:5", 4).dim() == 3);
}

TEST_CASE("ball least squares on a two-point toy") {
  RowMatrix phi(2, 1);
  phi << 1.0, 1.0;
  Vector target(2), w(2);
  target << 0.0, 1.0;
  w << 0.5, 0.5;
  BestInClass free = weighted_ball_least_squares(phi, target, w, 10.0);
  CHECK(free.beta[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(free.error == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_FALSE(free.constrained);
  BestInClass tight = weighted_ball_least_squares(phi, target, w, 0.25);
  CHECK(tight.beta[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(tight.error == doctest::Approx(std::sqrt(0.3125)).epsilon(1e-9));
  CHECK(tight.constrained);
  CHECK(weighted_ball_least_squares(phi, target, w, 0.0).beta[0] == 0.0);
  CHECK_THROWS_AS(weighted_ball_least_squares(phi, target, Vector::Zero(2), 1.0), ValidationError);
}

TEST_CASE("tabular best in class") {
  Vector target(3), w(3);
  target << 3.0, 4.0, std::nan("");
  w << 1.0, 1.0, 0.0;
  const FeatureMap t = tabular_features(3);
  const BestInClass exact = best_in_class(t, target, w, 10.0);
  CHECK(exact.error == 0.0);
  CHECK(exact.beta[2] == 0.0);
  const BestInClass ball = best_in_class(t, target, w, 2.5);
  CHECK(ball.beta[0] == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(ball.beta[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(ball.error == doctest::Approx(2.5).epsilon(1e-9));

  // agrees with the general solver
  Rng rng(2);
  Vector y(6), v(6);
  for (int i = 0; i < 6; ++i) {
    y[i] = 5 * rng.normal();
    v[i] = rng.uniform();
  }
  for (double radius : {1.0, 3.0, 100.0}) {
    const BestInClass a = best_in_class(tabular_features(6), y, v, radius);
    const BestInClass b = weighted_ball_least_squares(RowMatrix::Identity(6, 6), y, v, radius);
    CHECK(a.error == doctest::Approx(b.error).epsilon(1e-6));
    CHECK((a.beta - b.beta).norm() < 1e-5);
  }
}

TEST_CASE("general solver respects the ball") {
  Rng rng(4);
  const FeatureMap f = random_features(12, 4, 3);
  Vector y(12), w(12);
  for (int i = 0; i < 12; ++i) {
    y[i] = 10 * rng.normal();
    w[i] = rng.uniform();
  }
  for (double radius : {0.5, 2.0, 1e3}) {
    const BestInClass b = best_in_class(f, y, w, radius);
    CHECK(b.beta.norm() <= radius + 1e-9);
    // no feasible point in a small neighbourhood does better
    for (int trial = 0; trial < 50; ++trial) {
      Vector c = b.beta;
      for (int j = 0; j < 4; ++j) c[j] += 1e-3 * rng.normal();
      if (c.norm() > radius) c *= radius / c.norm();
      double sum = 0.0;
      for (int i = 0; i < 12; ++i) {
        const double r = f.dot(c, i) - y[i];
        sum += w[i] * r * r;
      }
      CHECK(std::sqrt(sum) >= b.error - 1e-9);
    }
  }
}
