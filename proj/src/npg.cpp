#include "aliased_ac/npg.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "aliased_ac/csv.hpp"
#include "aliased_ac/error.hpp"

namespace aliased_ac {

LogLinearPolicy::LogLinearPolicy(FeatureMap psi, int n_agent_states, int n_actions)
    : LogLinearPolicy(psi, n_agent_states, n_actions, Vector::Zero(psi.dim())) {}

LogLinearPolicy::LogLinearPolicy(FeatureMap psi, int n_agent_states, int n_actions, Vector theta)
    : psi_(std::move(psi)), n_agent_states_(n_agent_states), n_actions_(n_actions) {
  if (psi_.n_rows() != n_agent_states * n_actions) {
    throw ValidationError("policy features need " + std::to_string(n_agent_states * n_actions) + " rows, got " +
                          std::to_string(psi_.n_rows()));
  }
  set_theta(std::move(theta));
}

void LogLinearPolicy::set_theta(Vector theta) {
  if (theta.size() != psi_.dim()) throw ValidationError("theta dimension differs from the policy features");
  theta_ = std::move(theta);
}

Vector LogLinearPolicy::action_probs(int z) const {
  Vector logits(n_actions_);
  for (int a = 0; a < n_actions_; ++a) logits[a] = psi_.dot(theta_, z * n_actions_ + a);
  const double top = logits.maxCoeff();
  Vector p = (logits.array() - top).exp().matrix();
  return p / p.sum();
}

Vector LogLinearPolicy::score(int z, int a) const {
  const Vector p = action_probs(z);
  Vector mean = Vector::Zero(dim());
  for (int b = 0; b < n_actions_; ++b) mean += p[b] * psi_.table().row(z * n_actions_ + b).transpose();
  return psi_.table().row(z * n_actions_ + a).transpose() - mean;
}

TabularPolicy LogLinearPolicy::to_table() const {
  RowMatrix probs(n_agent_states_, n_actions_);
  for (int z = 0; z < n_agent_states_; ++z) probs.row(z) = action_probs(z).transpose();
  return TabularPolicy(std::move(probs));
}

Eigen::MatrixXd fisher_matrix(const LogLinearPolicy& policy, const VisitationMeasure& d) {
  const Vector dz = d.agent_state_marginal();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(policy.dim(), policy.dim());
  for (int z = 0; z < policy.n_agent_states(); ++z) {
    if (dz[z] == 0.0) continue;
    const Vector p = policy.action_probs(z);
    for (int a = 0; a < policy.n_actions(); ++a) {
      const Vector sc = policy.score(z, a);
      F.noalias() += dz[z] * p[a] * sc * sc.transpose();
    }
  }
  return 0.5 * (F + F.transpose());
}

Vector finite_difference_gradient(const LogLinearPolicy& policy, const Pomdp& pomdp, const AgentStateProcess& asp,
                                  double h) {
  Vector grad(policy.dim());
  LogLinearPolicy probe = policy;
  for (int i = 0; i < policy.dim(); ++i) {
    Vector theta = policy.theta();
    theta[i] += h;
    probe.set_theta(theta);
    const double up = exact_return(pomdp, asp, probe.to_table());
    theta[i] -= 2.0 * h;
    probe.set_theta(theta);
    const double down = exact_return(pomdp, asp, probe.to_table());
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

Vector pseudo_inverse_solve(const Eigen::MatrixXd& matrix, const Vector& rhs, double cutoff) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma[0] == 0.0) return Vector::Zero(matrix.cols());
  const Vector projected = svd.matrixU().transpose() * rhs;
  Vector scaled = Vector::Zero(matrix.cols());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] >= cutoff * sigma[0]) scaled[i] = projected[i] / sigma[i];
  }
  return svd.matrixV() * scaled;
}

Vector exact_npg(const LogLinearPolicy& policy, const Pomdp& pomdp, const AgentStateProcess& asp) {
  const TabularPolicy table = policy.to_table();
  const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, table), pomdp.gamma());
  const Vector grad = finite_difference_gradient(policy, pomdp, asp);
  return pseudo_inverse_solve(fisher_matrix(policy, d), (1.0 - pomdp.gamma()) * grad);
}

NpgNormalEquations npg_normal_equations(const LogLinearPolicy& policy, const Pomdp& pomdp,
                                        const AgentStateProcess& asp) {
  const TabularPolicy table = policy.to_table();
  const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, table), pomdp.gamma());
  const QTable q = asymmetric_q_exact(pomdp, asp, table);
  const Vector adv = advantage_values(q, table);
  const QTable q_sym = symmetric_q_true(q, d);
  const Vector adv_sym = advantage_values(q_sym, table);
  const Vector dz = d.agent_state_marginal();

  NpgNormalEquations out;
  out.fisher = fisher_matrix(policy, d);
  out.rhs_asymmetric = Vector::Zero(policy.dim());
  out.rhs_symmetric = Vector::Zero(policy.dim());
  const int S = pomdp.n_states();
  const int A = pomdp.n_actions();
  for (int z = 0; z < asp.n_agent_states(); ++z) {
    if (dz[z] == 0.0) continue;
    for (int a = 0; a < A; ++a) {
      const Vector sc = policy.score(z, a);
      const double pa = table(z, a);
      for (int s = 0; s < S; ++s) {
        const double w = d(s, z) * pa;
        if (w != 0.0) out.rhs_asymmetric += w * adv[q.index(s, z, a)] * sc;
      }
      out.rhs_symmetric += dz[z] * pa * adv_sym[q_sym.index(z, a)] * sc;
    }
  }
  return out;
}

Vector npg_inner_gradient(const LogLinearPolicy& policy, const Vector& w, int z, int a, double advantage) {
  const Vector sc = policy.score(z, a);
  return 2.0 * (sc.dot(w) - advantage) * sc;
}

double advantage_from_critic(const LinearCritic& critic, const LogLinearPolicy& policy, int s, int z, int a) {
  const Vector p = policy.action_probs(z);
  double v = 0.0;
  for (int b = 0; b < policy.n_actions(); ++b) v += p[b] * critic.value(s, z, b);
  return critic.value(s, z, a) - v;
}

Vector advantage_table(const LinearCritic& critic, const TabularPolicy& policy) {
  const Vector q = critic.table();
  Vector adv(q.size());
  const int A = critic.n_actions;
  const int groups = static_cast<int>(q.size()) / A;
  for (int g = 0; g < groups; ++g) {
    const int z = critic.mode == CriticMode::asymmetric ? g % critic.n_agent_states : g;
    double v = 0.0;
    for (int a = 0; a < A; ++a) v += policy(z, a) * q[g * A + a];
    for (int a = 0; a < A; ++a) adv[g * A + a] = q[g * A + a] - v;
  }
  return adv;
}

double NacConfig::outer_step() const { return eta ? *eta : 1.0 / std::sqrt(static_cast<double>(T)); }

double NacConfig::inner_step(double gamma) const {
  return zeta ? *zeta : radius * std::sqrt(1.0 - gamma) / std::sqrt(2.0 * N);
}

void NacConfig::validate() const {
  if (T < 1 || N < 1) throw ValidationError("T and N must be >= 1");
  if (eta && !(*eta >= 0.0)) throw ValidationError("eta must be >= 0");
  if (zeta && !(*zeta >= 0.0)) throw ValidationError("zeta must be >= 0");
  if (!(radius > 0.0)) throw ValidationError("B must be > 0");
  td.validate();
}

void write_csv(std::ostream& out, const NacTrace& trace) {
  CsvWriter csv(out);
  csv.header({"t", "J", "critic_error", "w_bar_norm", "theta_norm"});
  for (const auto& r : trace.records) {
    csv.cell(r.t).cell(r.J);
    if (std::isnan(r.critic_error)) {
      csv.empty();
    } else {
      csv.cell(r.critic_error);
    }
    csv.cell(r.w_bar_norm).cell(r.theta_norm);
    csv.end_row();
  }
}

namespace {

template <typename AdvantageFn>
Vector inner_loop(const Pomdp& pomdp, const AgentStateProcess& asp, const LogLinearPolicy& policy,
                  const TabularPolicy& table, int N, double zeta, double radius, Rng& rng, AdvantageFn&& advantage) {
  Vector w = Vector::Zero(policy.dim());
  Vector sum = Vector::Zero(policy.dim());
  for (int n = 0; n < N; ++n) {
    const DiscountedSample x = sample_discounted(pomdp, asp, table, rng);
    const int a = sample_action(table, x.agent_state, rng);
    const Vector v = npg_inner_gradient(policy, w, x.agent_state, a, advantage(x.state, x.agent_state, a));
    sum += w;
    w = project_ball(w - zeta * v, radius);
  }
  return sum / static_cast<double>(N);
}

}  // namespace

Vector npg_sgd(const Pomdp& pomdp, const AgentStateProcess& asp, const LogLinearPolicy& policy,
               const Vector& advantages, CriticMode mode, int N, double zeta, double radius, Rng& rng) {
  const int Z = asp.n_agent_states();
  const int A = pomdp.n_actions();
  if (advantages.size() != feature_rows(mode, pomdp.n_states(), Z, A)) {
    throw ValidationError("advantage table has the wrong size");
  }
  return inner_loop(pomdp, asp, policy, policy.to_table(), N, zeta, radius, rng, [&](int s, int z, int a) {
    return mode == CriticMode::asymmetric ? advantages[(s * Z + z) * A + a] : advantages[z * A + a];
  });
}

NacResult nac_run(const Pomdp& pomdp, const AgentStateProcess& asp, const FeatureMap& critic_features,
                  const FeatureMap& psi, const NacConfig& config, Rng& rng) {
  config.validate();
  TdConfig td = config.td;
  td.mode = config.mode;
  td.radius = config.radius;
  const double eta = config.outer_step();
  const double zeta = config.inner_step(pomdp.gamma());
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  LogLinearPolicy policy(psi, asp.n_agent_states(), pomdp.n_actions());
  NacTrace trace;
  for (int t = 0; t < config.T; ++t) {
    const TabularPolicy table = policy.to_table();
    NacRecord rec{t, exact_return(pomdp, asp, table), kNaN, 0.0, policy.theta().norm()};
    trace.thetas.push_back(policy.theta());

    std::optional<QTable> exact;
    CriticOracle oracle;
    if (config.measure_critic) {
      const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, table), pomdp.gamma());
      QTable q = asymmetric_q_exact(pomdp, asp, table);
      exact.emplace(config.mode == CriticMode::asymmetric ? std::move(q) : symmetric_q_true(q, d));
      oracle = make_oracle(*exact, d, table);
    }
    const TdResult critic = td_learn(pomdp, asp, table, critic_features, td, rng, exact ? &oracle : nullptr);
    if (critic.trace.final_error) rec.critic_error = *critic.trace.final_error;

    Vector w_bar;
    if (config.precomputed_advantages) {
      w_bar = npg_sgd(pomdp, asp, policy, advantage_table(critic.critic, table), config.mode, config.N, zeta,
                      config.radius, rng);
    } else {
      w_bar = inner_loop(pomdp, asp, policy, table, config.N, zeta, config.radius, rng, [&](int s, int z, int a) {
        return advantage_from_critic(critic.critic, policy, s, z, a);
      });
    }
    rec.w_bar_norm = w_bar.norm();
    trace.records.push_back(rec);
    policy.set_theta(policy.theta() + eta * w_bar);
  }
  trace.final_theta = policy.theta();
  return {std::move(policy), std::move(trace)};
}

}  // namespace aliased_ac
