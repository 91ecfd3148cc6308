#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/features.hpp"
#include "aliased_ac/oracles.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/rng.hpp"
#include "aliased_ac/tabular_policy.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

/// Linear critic <beta, phi(x)> with x = (s, z, a) (asymmetric) or (z, a)
/// (symmetric).
struct LinearCritic {
  Vector beta;
  double radius = 1.0;
  FeatureMap features;
  CriticMode mode = CriticMode::asymmetric;
  int n_states = 0;
  int n_agent_states = 0;
  int n_actions = 0;

  int row(int s, int z, int a) const {
    return mode == CriticMode::asymmetric ? (s * n_agent_states + z) * n_actions + a : z * n_actions + a;
  }
  double value(int s, int z, int a) const { return features.dot(beta, row(s, z, a)); }
  /// Critic evaluated on every row, flattened like a QTable of the same mode.
  Vector table() const { return features.table() * beta; }
};

LinearCritic make_critic(const FeatureMap& features, CriticMode mode, double radius, int n_states,
                         int n_agent_states, int n_actions);

struct TdConfig {
  int m = 1;
  std::int64_t K = 1000;
  std::optional<double> alpha;  // unset: 1 / sqrt(K)
  double radius = 15.0;
  CriticMode mode = CriticMode::asymmetric;
  std::uint64_t seed = 0;
  std::int64_t eval_every = 0;  // 0: measure the error only at the end

  double step_size() const;
  /// Throws ValidationError on out-of-range fields.
  void validate() const;
};

struct SegmentStep {
  int state;
  int agent_state;
  int action;
  double reward;
};

/// m on-policy transitions followed by the bootstrap point (s_m, z_m, a_m).
struct Segment {
  std::vector<SegmentStep> steps;
  int state = 0;
  int agent_state = 0;
  int action = 0;
};

/// Starts at (s, z) ~ d^pi, draws a_0 ~ pi(.|z_0) and rolls m steps.
Segment sample_segment(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m,
                       Rng& rng);

struct SemiGradient {
  double delta = 0.0;
  Vector g;
};

/// delta = sum_i gamma^i r_i + gamma^m Q(x_m) - Q(x_0), g = delta phi(x_0).
SemiGradient td_semi_gradient(const LinearCritic& critic, const Segment& segment, double gamma);

/// Euclidean projection on the ball of radius B.
Vector project_ball(const Vector& v, double radius);

struct TdRecord {
  std::int64_t k;
  double delta;
  double g_norm;
  double beta_norm;        // ||beta_k||, the iterate used by update k
  double measured_error;   // error of the running average; NaN when not measured
};

struct TdTrace {
  std::vector<TdRecord> records;
  Vector beta_bar;
  std::optional<double> final_error;
};

void write_csv(std::ostream& out, const TdTrace& trace);

/// Exact target used to measure critic errors during td_learn.
struct CriticOracle {
  const QTable* exact = nullptr;
  Vector weights;  // sampling weights of the table's mode
};

CriticOracle make_oracle(const QTable& exact, const VisitationMeasure& d, const TabularPolicy& policy);

struct TdResult {
  LinearCritic critic;  // beta = beta_bar
  TdTrace trace;
};

/// Projected m-step TD with iterate averaging. beta_0 = 0 and each
/// update uses a fresh segment.
TdResult td_learn(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                  const FeatureMap& features, const TdConfig& config, Rng& rng,
                  const CriticOracle* oracle = nullptr);

/// ||critic - exact||_d with the sampling weights of the exact table's mode.
double measured_critic_error(const LinearCritic& critic, const QTable& exact, const VisitationMeasure& d,
                             const TabularPolicy& policy);

}  // namespace aliased_ac
