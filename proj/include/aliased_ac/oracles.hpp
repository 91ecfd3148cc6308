#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/rng.hpp"
#include "aliased_ac/tabular_policy.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

/// Which Q-function a critic targets: asymmetric Q(s,z,a) or symmetric Q(z,a).
enum class CriticMode { asymmetric, symmetric };

const char* to_string(CriticMode mode);
CriticMode parse_mode(const std::string& text);

/// Markov chain over (s, z) pairs induced by a fixed agent-state policy.
/// Pair (s, z) has flat index s * n_agent_states + z.
struct JointChain {
  int n_states = 0;
  int n_agent_states = 0;
  Vector joint_initial;
  SparseRowMatrix joint_transition;

  int size() const { return n_states * n_agent_states; }
  int pair_index(int s, int z) const { return s * n_agent_states + z; }
};

/// Kernel of the (s, z, a) chain: rows (s, z, a) with flat index
/// (s * Z + z) * A + a, columns (s', z').
struct StateActionModel {
  int n_states = 0;
  int n_agent_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  SparseRowMatrix next_pair;    // Pr(s', z' | s, z, a)
  SparseRowMatrix policy_lift;  // (s, z) -> (s, z, a) with weight pi(a|z)
  Vector reward;                // r(s, a) on every (s, z, a) row

  int size() const { return n_states * n_agent_states * n_actions; }
  int index(int s, int z, int a) const { return (s * n_agent_states + z) * n_actions + a; }
};

StateActionModel build_state_action_model(const Pomdp& pomdp, const AgentStateProcess& asp,
                                          const TabularPolicy& policy);

JointChain build_joint_chain(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy);

enum class VisitationKind { discounted, m_step };

/// Probability vector over (s, z) pairs, indexed like JointChain.
struct VisitationMeasure {
  Vector weights;
  VisitationKind kind = VisitationKind::discounted;
  int n_states = 0;
  int n_agent_states = 0;

  double operator()(int s, int z) const { return weights[s * n_agent_states + z]; }
  /// sum_s d(s, z)
  Vector agent_state_marginal() const;
  /// d(s | z); throws UndefinedRowError when sum_s d(s, z) = 0.
  Vector conditional_state(int z) const;
};

/// Solves (I - gamma P^T) d = (1 - gamma) p0.
VisitationMeasure discounted_visitation(const JointChain& chain, double gamma);

/// d P^m.
VisitationMeasure visitation_m_steps(const JointChain& chain, const VisitationMeasure& d, int m);

/// d(s,z,a) = d(s,z) pi(a|z) in asymmetric mode, d(z,a) = sum_s d(s,z) pi(a|z)
/// in symmetric mode, flattened like the matching QTable.
Vector sampling_weights(const VisitationMeasure& d, const TabularPolicy& policy, CriticMode mode);

enum class QKind { asymmetric, symmetric_true, symmetric_fixed_point };

/// Exact Q-function table. Asymmetric tables are indexed (s * Z + z) * A + a,
/// symmetric ones z * A + a. Rows of agent states that are unreachable under
/// the conditioning measure hold NaN and are reported as undefined.
class QTable {
 public:
  QTable(QKind kind, int n_states, int n_agent_states, int n_actions, Vector values);

  QKind kind() const { return kind_; }
  bool symmetric() const { return kind_ != QKind::asymmetric; }
  CriticMode mode() const { return symmetric() ? CriticMode::symmetric : CriticMode::asymmetric; }
  int n_states() const { return n_states_; }
  int n_agent_states() const { return n_agent_states_; }
  int n_actions() const { return n_actions_; }
  const Vector& values() const { return values_; }

  int index(int s, int z, int a) const { return (s * n_agent_states_ + z) * n_actions_ + a; }
  int index(int z, int a) const { return z * n_actions_ + a; }

  /// Asymmetric lookup.
  double at(int s, int z, int a) const;
  /// Symmetric lookup; throws UndefinedRowError on an undefined row.
  double at(int z, int a) const;
  bool defined(int z) const;

  /// V(z) = sum_a pi(a|z) Q(z,a) for symmetric tables.
  double state_value(int z, const TabularPolicy& policy) const;
  /// V(s,z) for asymmetric tables.
  double state_value(int s, int z, const TabularPolicy& policy) const;

 private:
  QKind kind_;
  int n_states_;
  int n_agent_states_;
  int n_actions_;
  Vector values_;
};

/// Fixed point of Q = r + gamma K Pi Q over (s, z, a).
QTable asymmetric_q_exact(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy);
QTable asymmetric_q_exact(const StateActionModel& model);

/// m-step asymmetric Bellman operator applied to a flat (s, z, a) vector.
Vector apply_asymmetric_bellman(const StateActionModel& model, const Vector& q, int m);

/// m-step symmetric Bellman operator closed with the conditional of S_0
/// given Z_0 under d_boot. Agent states with no d_boot mass bootstrap from
/// a uniform state distribution; they carry zero weight in every d-norm.
class SymmetricBellman {
 public:
  SymmetricBellman(const StateActionModel& model, const VisitationMeasure& d_boot, int m);

  int m() const { return m_; }
  double modulus() const { return modulus_; }
  /// Expected m-step discounted reward per (z, a).
  const Vector& m_step_reward() const { return m_step_reward_; }
  /// Row-stochastic map from (z, a) to the law of (Z_m, A_m).
  const RowMatrix& bootstrap_matrix() const { return bootstrap_; }

  Vector apply(const Vector& q) const;
  QTable fixed_point() const;

 private:
  int n_agent_states_;
  int n_actions_;
  int m_;
  double modulus_;
  Vector m_step_reward_;
  RowMatrix bootstrap_;
};

QTable symmetric_fixed_point(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m,
                             const VisitationMeasure& d_boot);

/// Q(z,a) = sum_s d(s|z) Q(s,z,a); rows with sum_s d(s,z) = 0 are undefined.
QTable symmetric_q_true(const QTable& asymmetric, const VisitationMeasure& d);
QTable symmetric_q_true(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                        const VisitationMeasure& d);

/// A = Q - V, same kind and indexing as q.
Vector advantage_values(const QTable& q, const TabularPolicy& policy);

/// b_hat_t(.|z) for every z from the t-step marginal of the joint chain
/// started at P(s0, z0). Row z is NaN when Pr(Z_t = z) = 0.
RowMatrix approximate_beliefs(const JointChain& chain, int t);

/// b_hat_t(.|z); throws UndefinedRowError when Pr(Z_t = z) = 0.
Vector approximate_belief(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int t,
                          int z);

/// Discounted-average variant b_hat_d(s|z) = d(s|z).
Vector approximate_belief_discounted(const VisitationMeasure& d, int z);

struct DiscountedSample {
  int state;
  int agent_state;
  int t0;
};

/// Draws t0 with Pr(t0 = t) = (1 - gamma) gamma^t, t >= 0, then rolls the
/// joint chain t0 steps from a fresh initial draw. The marginal of
/// (state, agent_state) is d^pi.
DiscountedSample sample_discounted(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                                   Rng& rng);

/// J(pi) = (1/(1-gamma)) sum d(s,z) pi(a|z) r(s,a).
double exact_return(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy);
/// J(pi) = sum P(s0,z0) pi(a|z0) Q(s0,z0,a).
double exact_return_via_q(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy);

struct OptimalPolicy {
  TabularPolicy policy;
  double value;
  std::vector<int> actions;
};

inline constexpr std::int64_t kDefaultPolicyEnumerationCap = 1 << 20;

/// Best deterministic agent-state policy by enumeration. Ties go to the
/// lexicographically smallest action vector (z = 0 most significant).
OptimalPolicy brute_force_optimal(const Pomdp& pomdp, const AgentStateProcess& asp,
                                  std::int64_t cap = kDefaultPolicyEnumerationCap);

/// sqrt(sum_x w(x) diff(x)^2), skipping zero-weight entries.
double weighted_norm(const Vector& diff, const Vector& weights);

/// ||q1 - q2||_d with d the sampling weights of the tables' mode.
double weighted_distance(const QTable& q1, const QTable& q2, const VisitationMeasure& d, const TabularPolicy& policy);

/// CSV with header s,z,a,value (s left empty for symmetric tables).
void write_csv(std::ostream& out, const QTable& q);
/// CSV with header s,z,weight.
void write_csv(std::ostream& out, const VisitationMeasure& d);

}  // namespace aliased_ac
