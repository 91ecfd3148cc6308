#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/features.hpp"
#include "aliased_ac/history.hpp"
#include "aliased_ac/npg.hpp"
#include "aliased_ac/oracles.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/tabular_policy.hpp"
#include "aliased_ac/td.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

/// 0.5 * sum |mu - nu|. Throws ValidationError on a length mismatch.
double tv_distance(const Vector& mu, const Vector& nu);

double eps_td(std::int64_t K, double radius, double gamma, int m);
double eps_app(double best_in_class_error, double gamma, int m);
double eps_shift(double radius, double gamma, int m, double tv);
double eps_nac(int T, double radius, int n_actions);
double eps_actor(std::int64_t N, double radius, double gamma);

/// TV between the sampling distribution d and the bootstrap distribution
/// d_m, over (s,z,a) or (z,a) depending on the mode.
double sampling_shift_tv(const JointChain& chain, const VisitationMeasure& d, const TabularPolicy& policy, int m,
                         CriticMode mode);

/// d-norm of a function of the agent state: sqrt(sum_z d(z) f(z)^2).
/// Throws ValidationError if f is undefined where d(z) > 0.
double agent_state_norm(const Vector& f, const VisitationMeasure& d);

struct TruncatedValue {
  double value = 0.0;
  double tail = 0.0;  // bound on the omitted part
  bool monte_carlo = false;
};

struct AliasOptions {
  int horizon = 40;
  GapConditioning conditioning = GapConditioning::initial_distribution;
  std::int64_t node_cap = 200000;
  bool monte_carlo_fallback = false;
  int monte_carlo_episodes = 100000;
  std::uint64_t seed = 0;
};

TruncatedValue eps_alias(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m,
                         const AliasOptions& options = {});

/// Exactly 0 in asymmetric mode.
TruncatedValue eps_inf(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy_star,
                       CriticMode mode, const AliasOptions& options = {});

/// sqrt(min over ||w|| <= B of the d-weighted regression of the exact
/// advantage on the scores) for one policy.
double eps_grad(const LogLinearPolicy& policy, const Pomdp& pomdp, const AgentStateProcess& asp, double radius,
                CriticMode mode);

struct Concentrability {
  double value = 0.0;
  bool infinite = false;
};

/// sup over the support of d_star of d_star / d_t.
Concentrability concentrability(const Vector& d_star, const Vector& d_t);

struct AliasingLemmaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double tail = 0.0;
  bool holds = false;
};

AliasingLemmaCheck aliasing_lemma_check(const Pomdp& pomdp, const AgentStateProcess& asp,
                                        const TabularPolicy& policy, int m, const AliasOptions& options = {});

struct BoundReport {
  CriticMode mode = CriticMode::asymmetric;
  std::int64_t K = 0;
  int m = 1;
  double radius = 0.0;
  double gamma = 0.0;
  int n_seeds = 0;
  double eps_td = 0.0;
  double eps_app = 0.0;
  double eps_shift = 0.0;
  double eps_alias = 0.0;  // 0 and excluded in asymmetric mode
  double alias_tail = 0.0;
  double rhs_total = 0.0;
  double measured_lhs = 0.0;  // sqrt(mean over seeds of squared errors)
  double measured_stderr = 0.0;
  bool holds = false;
  std::string conditioning;
};

/// Everything in a critic bound that does not depend on the TD runs.
struct CriticBoundTerms {
  double eps_td = 0.0;
  double eps_app = 0.0;
  double eps_shift = 0.0;
  double eps_alias = 0.0;
  double alias_tail = 0.0;
  double total() const { return eps_td + eps_app + eps_shift + eps_alias + alias_tail; }
};

CriticBoundTerms critic_bound_terms(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                                    const FeatureMap& features, const TdConfig& config,
                                    const AliasOptions& alias = {});

/// Assembles the report from per-seed errors ||Q - Q_bar||_d. Needs two seeds.
BoundReport bound_report_td(const std::vector<double>& errors, const CriticBoundTerms& terms, const TdConfig& config,
                            double gamma, GapConditioning conditioning);

struct NacBoundReport {
  CriticMode mode = CriticMode::asymmetric;
  int T = 0;
  int N = 0;
  double radius = 0.0;
  double gamma = 0.0;
  int n_seeds = 0;
  double eps_nac = 0.0;
  double eps_actor = 0.0;
  double eps_inf = 0.0;
  double eps_grad = 0.0;
  double avg_eps_critic = 0.0;
  Concentrability concentrability;
  double rhs_total = 0.0;  // bound on min_t E[J* - J(pi_t)], infinite if C is
  double measured_suboptimality = 0.0;
  bool holds = false;
};

/// Recomputes every term along the recorded policies of each trace.
NacBoundReport nac_bound_report(const Pomdp& pomdp, const AgentStateProcess& asp, const FeatureMap& critic_features,
                                const FeatureMap& psi, const NacConfig& config, const std::vector<NacTrace>& traces,
                                const AliasOptions& alias = {});

void write_csv(std::ostream& out, const std::vector<BoundReport>& reports);
void write_csv(std::ostream& out, const std::vector<NacBoundReport>& reports);
std::string to_text(const BoundReport& report);
std::string to_text(const NacBoundReport& report);

}  // namespace aliased_ac
