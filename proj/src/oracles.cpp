#include "aliased_ac/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/SparseLU>

#include "aliased_ac/csv.hpp"
#include "aliased_ac/error.hpp"

namespace aliased_ac {

namespace {

// Direct solves up to this many unknowns, value iteration beyond.
constexpr Eigen::Index kDirectSolveLimit = 10000;
constexpr double kIterationTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using SparseColMatrix = Eigen::SparseMatrix<double>;

/// x = b + gamma * M x, by sparse LU when small enough, else fixed-point
/// iteration.
Vector solve_discounted(const SparseRowMatrix& M, const Vector& b, double gamma) {
  const Eigen::Index n = b.size();
  Vector x;
  if (n <= kDirectSolveLimit) {
    SparseColMatrix A(n, n);
    A.setIdentity();
    A -= gamma * SparseColMatrix(M);
    A.makeCompressed();
    Eigen::SparseLU<SparseColMatrix> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
    x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU solve failed");
  } else {
    x = b;
    for (int it = 0; it < 1000000; ++it) {
      Vector next = b + gamma * (M * x);
      const double change = (next - x).lpNorm<Eigen::Infinity>();
      x.swap(next);
      if (change <= kIterationTolerance) break;
    }
  }
  const double residual = (x - b - gamma * (M * x)).lpNorm<Eigen::Infinity>();
  if (!(residual <= kResidualTolerance)) {
    throw SolverError("fixed-point residual " + format_number(residual) + " exceeds tolerance");
  }
  return x;
}

/// Clamps round-off negatives and renormalizes a probability vector.
void clean_distribution(Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      if (v[i] < -1e-10) throw SolverError(std::string(what) + " has a negative entry");
      v[i] = 0.0;
    }
  }
  const double total = v.sum();
  if (std::abs(total - 1.0) > 1e-10) throw SolverError(std::string(what) + " does not sum to 1");
  v /= total;
}

}  // namespace

const char* to_string(CriticMode mode) { return mode == CriticMode::asymmetric ? "asym" : "sym"; }

CriticMode parse_mode(const std::string& text) {
  if (text == "asym" || text == "asymmetric") return CriticMode::asymmetric;
  if (text == "sym" || text == "symmetric") return CriticMode::symmetric;
  throw ValidationError("mode must be 'asym' or 'sym', got '" + text + "'");
}

StateActionModel build_state_action_model(const Pomdp& pomdp, const AgentStateProcess& asp,
                                          const TabularPolicy& policy) {
  if (asp.n_actions() != pomdp.n_actions() || asp.n_obs() != pomdp.n_obs()) {
    throw ValidationError("agent-state process does not match the POMDP dimensions");
  }
  if (policy.n_agent_states() != asp.n_agent_states() || policy.n_actions() != pomdp.n_actions()) {
    throw ValidationError("policy does not match the agent-state process dimensions");
  }
  StateActionModel model;
  model.n_states = pomdp.n_states();
  model.n_agent_states = asp.n_agent_states();
  model.n_actions = pomdp.n_actions();
  model.gamma = pomdp.gamma();
  const int S = model.n_states;
  const int Z = model.n_agent_states;
  const int A = model.n_actions;
  const int O = pomdp.n_obs();

  std::vector<Eigen::Triplet<double>> next;
  std::vector<Eigen::Triplet<double>> lift;
  model.reward.resize(model.size());
  Vector pair_row(S * Z);
  for (int s = 0; s < S; ++s) {
    for (int z = 0; z < Z; ++z) {
      for (int a = 0; a < A; ++a) {
        const int row = model.index(s, z, a);
        model.reward[row] = pomdp.expected_reward(s, a);
        if (policy(z, a) > 0.0) lift.emplace_back(s * Z + z, row, policy(z, a));
        pair_row.setZero();
        for (int s2 = 0; s2 < S; ++s2) {
          const double t = pomdp.T(s, a, s2);
          if (t == 0.0) continue;
          for (int o = 0; o < O; ++o) {
            const double to = t * pomdp.O(s2, o);
            if (to == 0.0) continue;
            const auto u = asp.kernel(z, a, o);
            for (int z2 = 0; z2 < Z; ++z2) {
              if (u[z2] != 0.0) pair_row[s2 * Z + z2] += to * u[z2];
            }
          }
        }
        for (int j = 0; j < S * Z; ++j) {
          if (pair_row[j] != 0.0) next.emplace_back(row, j, pair_row[j]);
        }
      }
    }
  }
  model.next_pair.resize(model.size(), S * Z);
  model.next_pair.setFromTriplets(next.begin(), next.end());
  model.policy_lift.resize(S * Z, model.size());
  model.policy_lift.setFromTriplets(lift.begin(), lift.end());
  return model;
}

JointChain build_joint_chain(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy) {
  const StateActionModel model = build_state_action_model(pomdp, asp, policy);
  JointChain chain;
  chain.n_states = model.n_states;
  chain.n_agent_states = model.n_agent_states;
  chain.joint_transition = model.policy_lift * model.next_pair;
  chain.joint_transition.prune(0.0);

  chain.joint_initial = Vector::Zero(chain.size());
  for (int s = 0; s < chain.n_states; ++s) {
    for (int o = 0; o < pomdp.n_obs(); ++o) {
      const double po = pomdp.initial()[s] * pomdp.O(s, o);
      if (po == 0.0) continue;
      const auto u = asp.kernel(asp.null_state(), asp.null_action(), o);
      for (int z = 0; z < chain.n_agent_states; ++z) chain.joint_initial[chain.pair_index(s, z)] += po * u[z];
    }
  }
  return chain;
}

Vector VisitationMeasure::agent_state_marginal() const {
  Vector marginal = Vector::Zero(n_agent_states);
  for (int s = 0; s < n_states; ++s) marginal += weights.segment(s * n_agent_states, n_agent_states);
  return marginal;
}

Vector VisitationMeasure::conditional_state(int z) const {
  Vector out(n_states);
  for (int s = 0; s < n_states; ++s) out[s] = (*this)(s, z);
  const double total = out.sum();
  if (!(total > 0.0)) {
    throw UndefinedRowError("agent state " + std::to_string(z) + " has zero probability under the visitation measure");
  }
  return out / total;
}

VisitationMeasure discounted_visitation(const JointChain& chain, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must be in [0, 1)");
  VisitationMeasure d;
  d.kind = VisitationKind::discounted;
  d.n_states = chain.n_states;
  d.n_agent_states = chain.n_agent_states;
  // d^T = (1 - gamma) p0^T + gamma d^T P, i.e. d = (1 - gamma) p0 + gamma P^T d
  const SparseRowMatrix transposed = chain.joint_transition.transpose();
  d.weights = solve_discounted(transposed, (1.0 - gamma) * chain.joint_initial, gamma);
  clean_distribution(d.weights, "discounted visitation");
  return d;
}

VisitationMeasure visitation_m_steps(const JointChain& chain, const VisitationMeasure& d, int m) {
  if (m < 0) throw ValidationError("m must be non-negative");
  VisitationMeasure out = d;
  out.kind = m == 0 ? d.kind : VisitationKind::m_step;
  const SparseRowMatrix transposed = chain.joint_transition.transpose();
  for (int i = 0; i < m; ++i) out.weights = transposed * out.weights;
  return out;
}

Vector sampling_weights(const VisitationMeasure& d, const TabularPolicy& policy, CriticMode mode) {
  const int S = d.n_states;
  const int Z = d.n_agent_states;
  const int A = policy.n_actions();
  if (mode == CriticMode::asymmetric) {
    Vector w(S * Z * A);
    for (int s = 0; s < S; ++s) {
      for (int z = 0; z < Z; ++z) {
        for (int a = 0; a < A; ++a) w[(s * Z + z) * A + a] = d(s, z) * policy(z, a);
      }
    }
    return w;
  }
  const Vector marginal = d.agent_state_marginal();
  Vector w(Z * A);
  for (int z = 0; z < Z; ++z) {
    for (int a = 0; a < A; ++a) w[z * A + a] = marginal[z] * policy(z, a);
  }
  return w;
}

QTable::QTable(QKind kind, int n_states, int n_agent_states, int n_actions, Vector values)
    : kind_(kind),
      n_states_(n_states),
      n_agent_states_(n_agent_states),
      n_actions_(n_actions),
      values_(std::move(values)) {
  const Eigen::Index expected = static_cast<Eigen::Index>(symmetric() ? 1 : n_states_) * n_agent_states_ * n_actions_;
  if (values_.size() != expected) throw ValidationError("Q table has the wrong number of entries");
}

double QTable::at(int s, int z, int a) const {
  if (symmetric()) throw Error("asymmetric lookup on a symmetric Q table");
  return values_[index(s, z, a)];
}

bool QTable::defined(int z) const {
  if (!symmetric()) return true;
  return !std::isnan(values_[index(z, 0)]);
}

double QTable::at(int z, int a) const {
  if (!symmetric()) throw Error("symmetric lookup on an asymmetric Q table");
  const double v = values_[index(z, a)];
  if (std::isnan(v)) throw UndefinedRowError("Q(z=" + std::to_string(z) + ", .) is undefined: z is unreachable");
  return v;
}

double QTable::state_value(int z, const TabularPolicy& policy) const {
  double v = 0.0;
  for (int a = 0; a < n_actions_; ++a) v += policy(z, a) * at(z, a);
  return v;
}

double QTable::state_value(int s, int z, const TabularPolicy& policy) const {
  double v = 0.0;
  for (int a = 0; a < n_actions_; ++a) v += policy(z, a) * at(s, z, a);
  return v;
}

QTable asymmetric_q_exact(const StateActionModel& model) {
  const SparseRowMatrix kernel = model.next_pair * model.policy_lift;
  Vector q = solve_discounted(kernel, model.reward, model.gamma);
  const double upper = 1.0 / (1.0 - model.gamma);
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] < -1e-9 || q[i] > upper + 1e-9) throw SolverError("asymmetric Q entry outside [0, 1/(1-gamma)]");
    q[i] = std::clamp(q[i], 0.0, upper);
  }
  return QTable(QKind::asymmetric, model.n_states, model.n_agent_states, model.n_actions, std::move(q));
}

QTable asymmetric_q_exact(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy) {
  return asymmetric_q_exact(build_state_action_model(pomdp, asp, policy));
}

Vector apply_asymmetric_bellman(const StateActionModel& model, const Vector& q, int m) {
  if (m < 1) throw ValidationError("m must be >= 1");
  Vector out = q;
  for (int i = 0; i < m; ++i) {
    const Vector pair_value = model.policy_lift * out;
    out = model.reward + model.gamma * (model.next_pair * pair_value);
  }
  return out;
}

SymmetricBellman::SymmetricBellman(const StateActionModel& model, const VisitationMeasure& d_boot, int m)
    : n_agent_states_(model.n_agent_states), n_actions_(model.n_actions), m_(m) {
  if (m < 1) throw ValidationError("m must be >= 1");
  const int S = model.n_states;
  const int Z = model.n_agent_states;
  const int A = model.n_actions;
  modulus_ = std::pow(model.gamma, m);

  // lift (z, a) -> (s, z, a), then push it through m transitions
  RowMatrix reach = RowMatrix::Zero(model.size(), Z * A);
  for (int s = 0; s < S; ++s) {
    for (int z = 0; z < Z; ++z) {
      for (int a = 0; a < A; ++a) reach(model.index(s, z, a), z * A + a) = 1.0;
    }
  }
  Vector reward_acc = Vector::Zero(model.size());
  Vector reward_t = model.reward;
  double discount = 1.0;
  for (int t = 0; t < m; ++t) {
    reward_acc += discount * reward_t;
    discount *= model.gamma;
    if (t + 1 < m) reward_t = model.next_pair * (model.policy_lift * reward_t);
    const RowMatrix pairs = model.policy_lift * reach;
    reach = model.next_pair * pairs;
  }

  // condition on Z_0 with d_boot(s | z)
  const Vector marginal = d_boot.agent_state_marginal();
  m_step_reward_ = Vector::Zero(Z * A);
  bootstrap_ = RowMatrix::Zero(Z * A, Z * A);
  for (int z = 0; z < Z; ++z) {
    Vector cond(S);
    if (marginal[z] > 0.0) {
      for (int s = 0; s < S; ++s) cond[s] = d_boot(s, z) / marginal[z];
    } else {
      cond.setConstant(1.0 / S);
    }
    for (int a = 0; a < A; ++a) {
      const int row = z * A + a;
      for (int s = 0; s < S; ++s) {
        if (cond[s] == 0.0) continue;
        m_step_reward_[row] += cond[s] * reward_acc[model.index(s, z, a)];
        bootstrap_.row(row) += cond[s] * reach.row(model.index(s, z, a));
      }
    }
  }
}

Vector SymmetricBellman::apply(const Vector& q) const { return m_step_reward_ + modulus_ * (bootstrap_ * q); }

QTable SymmetricBellman::fixed_point() const {
  const Eigen::Index n = m_step_reward_.size();
  Vector q;
  if (n <= kDirectSolveLimit) {
    const RowMatrix system = RowMatrix::Identity(n, n) - modulus_ * bootstrap_;
    q = system.partialPivLu().solve(m_step_reward_);
  } else {
    q = m_step_reward_;
  }
  // polish by iteration until the update is below tolerance
  for (int it = 0; it < 1000000; ++it) {
    Vector next = apply(q);
    const double change = (next - q).lpNorm<Eigen::Infinity>();
    q.swap(next);
    if (change <= kIterationTolerance) break;
  }
  return QTable(QKind::symmetric_fixed_point, 0, n_agent_states_, n_actions_, std::move(q));
}

QTable symmetric_fixed_point(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m,
                             const VisitationMeasure& d_boot) {
  const StateActionModel model = build_state_action_model(pomdp, asp, policy);
  return SymmetricBellman(model, d_boot, m).fixed_point();
}

QTable symmetric_q_true(const QTable& asymmetric, const VisitationMeasure& d) {
  if (asymmetric.symmetric()) throw Error("symmetric_q_true needs an asymmetric table");
  const int S = asymmetric.n_states();
  const int Z = asymmetric.n_agent_states();
  const int A = asymmetric.n_actions();
  const Vector marginal = d.agent_state_marginal();
  Vector values(Z * A);
  for (int z = 0; z < Z; ++z) {
    for (int a = 0; a < A; ++a) {
      if (!(marginal[z] > 0.0)) {
        values[z * A + a] = kNaN;
        continue;
      }
      double q = 0.0;
      for (int s = 0; s < S; ++s) q += d(s, z) / marginal[z] * asymmetric.at(s, z, a);
      values[z * A + a] = q;
    }
  }
  return QTable(QKind::symmetric_true, 0, Z, A, std::move(values));
}

QTable symmetric_q_true(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                        const VisitationMeasure& d) {
  return symmetric_q_true(asymmetric_q_exact(pomdp, asp, policy), d);
}

Vector advantage_values(const QTable& q, const TabularPolicy& policy) {
  const int Z = q.n_agent_states();
  const int A = q.n_actions();
  Vector out(q.values().size());
  if (q.symmetric()) {
    for (int z = 0; z < Z; ++z) {
      if (!q.defined(z)) {
        for (int a = 0; a < A; ++a) out[q.index(z, a)] = kNaN;
        continue;
      }
      const double v = q.state_value(z, policy);
      for (int a = 0; a < A; ++a) out[q.index(z, a)] = q.at(z, a) - v;
    }
    return out;
  }
  for (int s = 0; s < q.n_states(); ++s) {
    for (int z = 0; z < Z; ++z) {
      const double v = q.state_value(s, z, policy);
      for (int a = 0; a < A; ++a) out[q.index(s, z, a)] = q.at(s, z, a) - v;
    }
  }
  return out;
}

RowMatrix approximate_beliefs(const JointChain& chain, int t) {
  if (t < 0) throw ValidationError("time must be non-negative");
  const SparseRowMatrix transposed = chain.joint_transition.transpose();
  Vector marginal = chain.joint_initial;
  for (int i = 0; i < t; ++i) marginal = transposed * marginal;
  const int S = chain.n_states;
  const int Z = chain.n_agent_states;
  RowMatrix out(Z, S);
  for (int z = 0; z < Z; ++z) {
    double total = 0.0;
    for (int s = 0; s < S; ++s) total += marginal[chain.pair_index(s, z)];
    for (int s = 0; s < S; ++s) out(z, s) = total > 0.0 ? marginal[chain.pair_index(s, z)] / total : kNaN;
  }
  return out;
}

Vector approximate_belief(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int t,
                          int z) {
  const RowMatrix beliefs = approximate_beliefs(build_joint_chain(pomdp, asp, policy), t);
  if (std::isnan(beliefs(z, 0))) {
    throw UndefinedRowError("Pr(Z_" + std::to_string(t) + " = " + std::to_string(z) + ") = 0");
  }
  return beliefs.row(z).transpose();
}

Vector approximate_belief_discounted(const VisitationMeasure& d, int z) { return d.conditional_state(z); }

DiscountedSample sample_discounted(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                                   Rng& rng) {
  const double gamma = pomdp.gamma();
  int t0 = 0;
  if (gamma > 0.0) {
    // Pr(t0 >= t) = Pr(u <= gamma^t) = gamma^t
    t0 = static_cast<int>(std::floor(std::log(rng.uniform_positive()) / std::log(gamma)));
  }
  auto [s, o] = initial_draw(pomdp, rng);
  int z = init_state(asp, o, rng);
  for (int i = 0; i < t0; ++i) {
    const int a = sample_action(policy, z, rng);
    const TransitionSample next = step(pomdp, s, a, rng);
    z = update(asp, z, a, next.observation, rng);
    s = next.next_state;
  }
  return {s, z, t0};
}

double exact_return(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy) {
  const JointChain chain = build_joint_chain(pomdp, asp, policy);
  const VisitationMeasure d = discounted_visitation(chain, pomdp.gamma());
  double total = 0.0;
  for (int s = 0; s < chain.n_states; ++s) {
    for (int z = 0; z < chain.n_agent_states; ++z) {
      const double w = d(s, z);
      if (w == 0.0) continue;
      for (int a = 0; a < pomdp.n_actions(); ++a) total += w * policy(z, a) * pomdp.expected_reward(s, a);
    }
  }
  return total / (1.0 - pomdp.gamma());
}

double exact_return_via_q(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy) {
  const JointChain chain = build_joint_chain(pomdp, asp, policy);
  const QTable q = asymmetric_q_exact(pomdp, asp, policy);
  double total = 0.0;
  for (int s = 0; s < chain.n_states; ++s) {
    for (int z = 0; z < chain.n_agent_states; ++z) {
      const double p = chain.joint_initial[chain.pair_index(s, z)];
      if (p != 0.0) total += p * q.state_value(s, z, policy);
    }
  }
  return total;
}

OptimalPolicy brute_force_optimal(const Pomdp& pomdp, const AgentStateProcess& asp, std::int64_t cap) {
  const int Z = asp.n_agent_states();
  const int A = pomdp.n_actions();
  double count = std::pow(static_cast<double>(A), Z);
  if (count > static_cast<double>(cap)) {
    throw CapExceededError("enumerating " + std::to_string(A) + "^" + std::to_string(Z) +
                           " deterministic policies exceeds the cap of " + std::to_string(cap));
  }
  std::vector<int> actions(static_cast<std::size_t>(Z), 0);
  std::vector<int> best_actions = actions;
  double best = 0.0;
  bool first = true;
  while (true) {
    const double value = exact_return(pomdp, asp, TabularPolicy::deterministic(actions, A));
    if (first || value > best + 1e-12 * std::max(1.0, std::abs(best))) {
      first = false;
      best = value;
      best_actions = actions;
    }
    // odometer with the last agent state as the least significant digit
    int pos = Z - 1;
    while (pos >= 0 && ++actions[static_cast<std::size_t>(pos)] == A) actions[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return {TabularPolicy::deterministic(best_actions, A), best, best_actions};
}

double weighted_norm(const Vector& diff, const Vector& weights) {
  if (diff.size() != weights.size()) throw ValidationError("weighted_norm: size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    if (weights[i] != 0.0) total += weights[i] * diff[i] * diff[i];
  }
  return std::sqrt(total);
}

double weighted_distance(const QTable& q1, const QTable& q2, const VisitationMeasure& d, const TabularPolicy& policy) {
  if (q1.mode() != q2.mode() || q1.values().size() != q2.values().size()) {
    throw ValidationError("weighted_distance: tables have different shapes");
  }
  return weighted_norm(q1.values() - q2.values(), sampling_weights(d, policy, q1.mode()));
}

void write_csv(std::ostream& out, const QTable& q) {
  CsvWriter csv(out);
  csv.header({"s", "z", "a", "value"});
  const int S = q.symmetric() ? 1 : q.n_states();
  for (int s = 0; s < S; ++s) {
    for (int z = 0; z < q.n_agent_states(); ++z) {
      for (int a = 0; a < q.n_actions(); ++a) {
        if (q.symmetric()) {
          csv.empty().cell(z).cell(a).cell(q.values()[q.index(z, a)]);
        } else {
          csv.cell(s).cell(z).cell(a).cell(q.values()[q.index(s, z, a)]);
        }
        csv.end_row();
      }
    }
  }
}

void write_csv(std::ostream& out, const VisitationMeasure& d) {
  CsvWriter csv(out);
  csv.header({"s", "z", "weight"});
  for (int s = 0; s < d.n_states; ++s) {
    for (int z = 0; z < d.n_agent_states; ++z) {
      csv.cell(s).cell(z).cell(d(s, z));
      csv.end_row();
    }
  }
}

}  // namespace aliased_ac
