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
#include "aliased_ac/td.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

/// Softmax policy pi(a|z) proportional to exp(<theta, psi(z, a)>), psi rows
/// indexed z * A + a.
class LogLinearPolicy {
 public:
  LogLinearPolicy(FeatureMap psi, int n_agent_states, int n_actions);
  LogLinearPolicy(FeatureMap psi, int n_agent_states, int n_actions, Vector theta);

  int n_agent_states() const { return n_agent_states_; }
  int n_actions() const { return n_actions_; }
  int dim() const { return psi_.dim(); }
  const FeatureMap& psi() const { return psi_; }
  const Vector& theta() const { return theta_; }
  void set_theta(Vector theta);

  Vector action_probs(int z) const;
  /// grad_theta log pi(a|z) = psi(z,a) - sum_a' pi(a'|z) psi(z,a').
  Vector score(int z, int a) const;
  TabularPolicy to_table() const;

 private:
  FeatureMap psi_;
  int n_agent_states_;
  int n_actions_;
  Vector theta_;
};

/// F = sum_{s,z} d(s,z) sum_a pi(a|z) score score^T.
Eigen::MatrixXd fisher_matrix(const LogLinearPolicy& policy, const VisitationMeasure& d);

/// grad_theta J by central differences on exact_return.
Vector finite_difference_gradient(const LogLinearPolicy& policy, const Pomdp& pomdp, const AgentStateProcess& asp,
                                  double h = 1e-5);

/// Moore-Penrose solve; singular values below cutoff * sigma_max are dropped.
Vector pseudo_inverse_solve(const Eigen::MatrixXd& matrix, const Vector& rhs, double cutoff = 1e-10);

/// (1 - gamma) F^+ grad J.
Vector exact_npg(const LogLinearPolicy& policy, const Pomdp& pomdp, const AgentStateProcess& asp);

/// Normal equations of the compatible-function regressions: fisher w = rhs.
struct NpgNormalEquations {
  Eigen::MatrixXd fisher;
  Vector rhs_asymmetric;  // E_d[score(z,a) Adv(s,z,a)]
  Vector rhs_symmetric;   // E_d[score(z,a) A(z,a)]
};

NpgNormalEquations npg_normal_equations(const LogLinearPolicy& policy, const Pomdp& pomdp,
                                        const AgentStateProcess& asp);

/// Gradient in w of (<score(z,a), w> - advantage)^2.
Vector npg_inner_gradient(const LogLinearPolicy& policy, const Vector& w, int z, int a, double advantage);

/// Q(x) - sum_a' pi(a'|z) Q(x with a'); s is ignored by symmetric critics.
double advantage_from_critic(const LinearCritic& critic, const LogLinearPolicy& policy, int s, int z, int a);

/// Advantages of a critic on every row (same flattening as the critic).
Vector advantage_table(const LinearCritic& critic, const TabularPolicy& policy);

struct NacConfig {
  int T = 50;
  int N = 2000;
  std::optional<double> eta;   // unset: 1 / sqrt(T)
  std::optional<double> zeta;  // unset: B sqrt(1 - gamma) / sqrt(2 N)
  double radius = 25.0;
  TdConfig td;
  CriticMode mode = CriticMode::asymmetric;
  std::uint64_t seed = 0;
  bool precomputed_advantages = true;
  bool measure_critic = true;

  double outer_step() const;
  double inner_step(double gamma) const;
  void validate() const;
};

struct NacRecord {
  int t;
  double J;
  double critic_error;  // NaN when not measured
  double w_bar_norm;
  double theta_norm;    // ||theta_t||
};

struct NacTrace {
  std::vector<NacRecord> records;
  std::vector<Vector> thetas;  // theta_0 .. theta_{T-1}
  Vector final_theta;
};

void write_csv(std::ostream& out, const NacTrace& trace);

struct NacResult {
  LogLinearPolicy policy;  // pi_T
  NacTrace trace;
};

/// Natural actor-critic. critic_features has one row per (s,z,a) in
/// asymmetric mode and per (z,a) in symmetric mode.
NacResult nac_run(const Pomdp& pomdp, const AgentStateProcess& asp, const FeatureMap& critic_features,
                  const FeatureMap& psi, const NacConfig& config, Rng& rng);

/// Averaged inner SGD of one outer step with a supplied advantage table
/// (rows like the critic of the given mode). Returns w_bar.
Vector npg_sgd(const Pomdp& pomdp, const AgentStateProcess& asp, const LogLinearPolicy& policy,
               const Vector& advantages, CriticMode mode, int N, double zeta, double radius, Rng& rng);

}  // namespace aliased_ac
