#include "aliased_ac/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "aliased_ac/csv.hpp"
#include "aliased_ac/error.hpp"

namespace aliased_ac {

double tv_distance(const Vector& mu, const Vector& nu) {
  if (mu.size() != nu.size()) {
    throw ValidationError("tv_distance: lengths " + std::to_string(mu.size()) + " and " +
                          std::to_string(nu.size()) + " differ");
  }
  return 0.5 * (mu - nu).cwiseAbs().sum();
}

double eps_td(std::int64_t K, double radius, double gamma, int m) {
  const double h = 1.0 / (1.0 - gamma) + 2.0 * radius;
  return std::sqrt((4.0 * radius * radius + h * h) /
                   (2.0 * std::sqrt(static_cast<double>(K)) * (1.0 - std::pow(gamma, m))));
}

double eps_app(double best_in_class_error, double gamma, int m) {
  const double gm = std::pow(gamma, m);
  return (1.0 + gm) / (1.0 - gm) * best_in_class_error;
}

double eps_shift(double radius, double gamma, int m, double tv) {
  const double gm = std::pow(gamma, m);
  return (radius + 1.0 / (1.0 - gamma)) * std::sqrt(2.0 * gm / (1.0 - gm) * std::sqrt(tv));
}

double eps_nac(int T, double radius, int n_actions) {
  return (radius * radius + 2.0 * std::log(static_cast<double>(n_actions))) / (2.0 * std::sqrt(static_cast<double>(T)));
}

double eps_actor(std::int64_t N, double radius, double gamma) {
  return std::sqrt((2.0 - gamma) * radius / ((1.0 - gamma) * std::sqrt(static_cast<double>(N))));
}

double sampling_shift_tv(const JointChain& chain, const VisitationMeasure& d, const TabularPolicy& policy, int m,
                         CriticMode mode) {
  const VisitationMeasure dm = visitation_m_steps(chain, d, m);
  return std::min(1.0, tv_distance(sampling_weights(d, policy, mode), sampling_weights(dm, policy, mode)));
}

double agent_state_norm(const Vector& f, const VisitationMeasure& d) {
  const Vector dz = d.agent_state_marginal();
  if (dz.size() != f.size()) throw ValidationError("agent-state function has the wrong length");
  double sum = 0.0;
  for (Eigen::Index z = 0; z < f.size(); ++z) {
    if (dz[z] == 0.0) continue;
    if (std::isnan(f[z])) {
      throw ValidationError("agent state " + std::to_string(z) +
                            " is visited but has no initial mass; use visitation conditioning");
    }
    sum += dz[z] * f[z] * f[z];
  }
  return std::sqrt(sum);
}

namespace {

BeliefGapOptions gap_options(const AliasOptions& options, int stride, double gamma) {
  BeliefGapOptions g;
  g.horizon = options.horizon;
  g.stride = stride;
  g.discount = gamma;
  g.conditioning = options.conditioning;
  g.node_cap = options.node_cap;
  g.monte_carlo_fallback = options.monte_carlo_fallback;
  g.monte_carlo_episodes = options.monte_carlo_episodes;
  g.seed = options.seed;
  return g;
}

const char* conditioning_name(GapConditioning c) {
  return c == GapConditioning::initial_distribution ? "initial" : "visitation";
}

}  // namespace

TruncatedValue eps_alias(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m,
                         const AliasOptions& options) {
  if (m < 1) throw ValidationError("m must be >= 1");
  const double gamma = pomdp.gamma();
  const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, policy), gamma);
  const BeliefGapResult gap = expected_belief_gap(pomdp, asp, policy, gap_options(options, m, gamma), &d);
  const double scale = 2.0 / (1.0 - gamma);
  return {scale * agent_state_norm(gap.per_agent_state, d), scale * gap.tail, gap.monte_carlo};
}

TruncatedValue eps_inf(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy_star,
                       CriticMode mode, const AliasOptions& options) {
  if (mode == CriticMode::asymmetric) return {};
  AliasOptions opts = options;
  opts.conditioning = GapConditioning::initial_distribution;
  const BeliefGapResult gap = expected_belief_gap(pomdp, asp, policy_star, gap_options(opts, 1, pomdp.gamma()));
  return {gap.unconditional, gap.tail, gap.monte_carlo};
}

double eps_grad(const LogLinearPolicy& policy, const Pomdp& pomdp, const AgentStateProcess& asp, double radius,
                CriticMode mode) {
  const TabularPolicy table = policy.to_table();
  const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, table), pomdp.gamma());
  const QTable q_asym = asymmetric_q_exact(pomdp, asp, table);
  const QTable q = mode == CriticMode::asymmetric ? q_asym : symmetric_q_true(q_asym, d);
  const Vector adv = advantage_values(q, table);
  const Vector weights = sampling_weights(d, table, mode);

  const int S = pomdp.n_states();
  const int Z = asp.n_agent_states();
  const int A = pomdp.n_actions();
  RowMatrix scores(adv.size(), policy.dim());
  for (int z = 0; z < Z; ++z) {
    for (int a = 0; a < A; ++a) {
      const Vector sc = policy.score(z, a);
      if (mode == CriticMode::asymmetric) {
        for (int s = 0; s < S; ++s) scores.row(q.index(s, z, a)) = sc.transpose();
      } else {
        scores.row(q.index(z, a)) = sc.transpose();
      }
    }
  }
  return weighted_ball_least_squares(scores, adv, weights, radius).error;
}

Concentrability concentrability(const Vector& d_star, const Vector& d_t) {
  if (d_star.size() != d_t.size()) throw ValidationError("concentrability: lengths differ");
  Concentrability out;
  for (Eigen::Index i = 0; i < d_star.size(); ++i) {
    if (d_star[i] <= 0.0) continue;
    if (d_t[i] <= 0.0) {
      out.infinite = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    out.value = std::max(out.value, d_star[i] / d_t[i]);
  }
  return out;
}

AliasingLemmaCheck aliasing_lemma_check(const Pomdp& pomdp, const AgentStateProcess& asp,
                                        const TabularPolicy& policy, int m, const AliasOptions& options) {
  if (m < 1) throw ValidationError("m must be >= 1");
  const double gamma = pomdp.gamma();
  const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, policy), gamma);
  const QTable q_true = symmetric_q_true(pomdp, asp, policy, d);
  const QTable q_tilde = symmetric_fixed_point(pomdp, asp, policy, m, d);
  const BeliefGapResult gap = expected_belief_gap(pomdp, asp, policy, gap_options(options, m, gamma), &d);
  const double factor = (1.0 - std::pow(gamma, m)) / (1.0 - gamma);

  AliasingLemmaCheck out;
  out.lhs = weighted_distance(q_true, q_tilde, d, policy);
  out.rhs = factor * agent_state_norm(gap.per_agent_state, d);
  out.tail = factor * gap.tail;
  out.holds = out.lhs <= out.rhs + out.tail;
  return out;
}

CriticBoundTerms critic_bound_terms(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                                    const FeatureMap& features, const TdConfig& config, const AliasOptions& alias) {
  const double gamma = pomdp.gamma();
  const JointChain chain = build_joint_chain(pomdp, asp, policy);
  const VisitationMeasure d = discounted_visitation(chain, gamma);
  const QTable q_asym = asymmetric_q_exact(pomdp, asp, policy);
  const QTable target = config.mode == CriticMode::asymmetric ? q_asym : symmetric_q_true(q_asym, d);

  CriticBoundTerms terms;
  terms.eps_td = eps_td(config.K, config.radius, gamma, config.m);
  terms.eps_app = eps_app(best_in_class(features, target, d, policy, config.radius).error, gamma, config.m);
  terms.eps_shift = eps_shift(config.radius, gamma, config.m, sampling_shift_tv(chain, d, policy, config.m, config.mode));
  if (config.mode == CriticMode::symmetric) {
    const TruncatedValue alias_term = eps_alias(pomdp, asp, policy, config.m, alias);
    terms.eps_alias = alias_term.value;
    terms.alias_tail = alias_term.tail;
  }
  return terms;
}

BoundReport bound_report_td(const std::vector<double>& errors, const CriticBoundTerms& terms, const TdConfig& config,
                            double gamma, GapConditioning conditioning) {
  if (errors.size() < 2) throw ValidationError("a bound report needs at least two seeds");
  BoundReport r;
  r.mode = config.mode;
  r.K = config.K;
  r.m = config.m;
  r.radius = config.radius;
  r.gamma = gamma;
  r.n_seeds = static_cast<int>(errors.size());
  r.eps_td = terms.eps_td;
  r.eps_app = terms.eps_app;
  r.eps_shift = terms.eps_shift;
  r.eps_alias = config.mode == CriticMode::symmetric ? terms.eps_alias : 0.0;
  r.alias_tail = config.mode == CriticMode::symmetric ? terms.alias_tail : 0.0;
  r.rhs_total = r.eps_td + r.eps_app + r.eps_shift + r.eps_alias + r.alias_tail;

  const double n = static_cast<double>(errors.size());
  double mean_sq = 0.0;
  for (double e : errors) mean_sq += e * e;
  mean_sq /= n;
  double var = 0.0;
  for (double e : errors) var += (e * e - mean_sq) * (e * e - mean_sq);
  var /= n - 1.0;
  r.measured_lhs = std::sqrt(mean_sq);
  // delta method for sqrt of the mean
  r.measured_stderr = mean_sq > 0.0 ? std::sqrt(var / n) / (2.0 * r.measured_lhs) : 0.0;
  r.holds = r.measured_lhs <= r.rhs_total;
  r.conditioning = config.mode == CriticMode::symmetric ? conditioning_name(conditioning) : "";
  return r;
}

namespace {

Vector state_action_weights(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy) {
  const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, policy), pomdp.gamma());
  return sampling_weights(d, policy, CriticMode::asymmetric);
}

}  // namespace

NacBoundReport nac_bound_report(const Pomdp& pomdp, const AgentStateProcess& asp, const FeatureMap& critic_features,
                                const FeatureMap& psi, const NacConfig& config, const std::vector<NacTrace>& traces,
                                const AliasOptions& alias) {
  if (traces.empty()) throw ValidationError("no traces");
  const double gamma = pomdp.gamma();
  const OptimalPolicy best = brute_force_optimal(pomdp, asp);
  const Vector d_star = state_action_weights(pomdp, asp, best.policy);

  TdConfig td = config.td;
  td.mode = config.mode;
  td.radius = config.radius;

  NacBoundReport r;
  r.mode = config.mode;
  r.T = config.T;
  r.N = config.N;
  r.radius = config.radius;
  r.gamma = gamma;
  r.n_seeds = static_cast<int>(traces.size());
  r.eps_nac = eps_nac(config.T, config.radius, pomdp.n_actions());
  r.eps_actor = eps_actor(config.N, config.radius, gamma);
  const TruncatedValue inf = eps_inf(pomdp, asp, best.policy, config.mode, alias);
  r.eps_inf = inf.value + inf.tail;

  std::vector<double> gap_sum(static_cast<std::size_t>(config.T), 0.0);
  double critic_sum = 0.0;
  int critic_count = 0;
  for (const auto& trace : traces) {
    if (static_cast<int>(trace.thetas.size()) != config.T) throw ValidationError("trace length differs from T");
    for (int t = 0; t < config.T; ++t) {
      const LogLinearPolicy policy(psi, asp.n_agent_states(), pomdp.n_actions(), trace.thetas[t]);
      const TabularPolicy table = policy.to_table();
      critic_sum += critic_bound_terms(pomdp, asp, table, critic_features, td, alias).total();
      ++critic_count;
      r.eps_grad = std::max(r.eps_grad, eps_grad(policy, pomdp, asp, config.radius, config.mode));
      const Concentrability c = concentrability(d_star, state_action_weights(pomdp, asp, table));
      r.concentrability.infinite = r.concentrability.infinite || c.infinite;
      r.concentrability.value = std::max(r.concentrability.value, c.value);
      gap_sum[t] += best.value - trace.records[t].J;
    }
  }
  r.avg_eps_critic = critic_sum / critic_count;
  r.measured_suboptimality = std::numeric_limits<double>::infinity();
  for (double g : gap_sum) r.measured_suboptimality = std::min(r.measured_suboptimality, g / traces.size());
  const double inner = r.eps_actor + 2.0 * r.eps_grad + 2.0 * std::sqrt(6.0) * r.avg_eps_critic;
  r.rhs_total = r.concentrability.infinite
                    ? std::numeric_limits<double>::infinity()
                    : (r.eps_nac + 2.0 * r.eps_inf + r.concentrability.value * inner) / (1.0 - gamma);
  r.holds = r.measured_suboptimality <= r.rhs_total;
  return r;
}

void write_csv(std::ostream& out, const std::vector<BoundReport>& reports) {
  CsvWriter csv(out);
  csv.header({"mode", "K", "m", "B", "gamma", "n_seeds", "eps_td", "eps_app", "eps_shift", "eps_alias", "alias_tail",
              "rhs_total", "measured_lhs", "measured_stderr", "holds", "conditioning"});
  for (const auto& r : reports) {
    csv.cell(std::string_view(to_string(r.mode))).cell(static_cast<long long>(r.K)).cell(r.m).cell(r.radius);
    csv.cell(r.gamma).cell(r.n_seeds).cell(r.eps_td).cell(r.eps_app).cell(r.eps_shift).cell(r.eps_alias);
    csv.cell(r.alias_tail).cell(r.rhs_total).cell(r.measured_lhs).cell(r.measured_stderr);
    csv.cell(r.holds ? 1 : 0).cell(std::string_view(r.conditioning));
    csv.end_row();
  }
}

void write_csv(std::ostream& out, const std::vector<NacBoundReport>& reports) {
  CsvWriter csv(out);
  csv.header({"mode", "T", "N", "B", "gamma", "n_seeds", "eps_nac", "eps_actor", "eps_inf", "eps_grad",
              "avg_eps_critic", "concentrability", "rhs_total", "measured_suboptimality", "holds"});
  for (const auto& r : reports) {
    csv.cell(std::string_view(to_string(r.mode))).cell(r.T).cell(r.N).cell(r.radius).cell(r.gamma).cell(r.n_seeds);
    csv.cell(r.eps_nac).cell(r.eps_actor).cell(r.eps_inf).cell(r.eps_grad).cell(r.avg_eps_critic);
    csv.cell(r.concentrability.value).cell(r.rhs_total).cell(r.measured_suboptimality).cell(r.holds ? 1 : 0);
    csv.end_row();
  }
}

std::string to_text(const BoundReport& r) {
  std::ostringstream out;
  out << "critic bound (" << to_string(r.mode) << "), K=" << r.K << " m=" << r.m << " B=" << format_number(r.radius)
      << " gamma=" << format_number(r.gamma) << " seeds=" << r.n_seeds << "\n";
  out << "  eps_td        " << format_number(r.eps_td) << "\n";
  out << "  eps_app       " << format_number(r.eps_app) << "\n";
  out << "  eps_shift     " << format_number(r.eps_shift) << "\n";
  if (r.mode == CriticMode::symmetric) {
    out << "  eps_alias     " << format_number(r.eps_alias) << " (+ tail " << format_number(r.alias_tail)
        << ", conditioning " << r.conditioning << ")\n";
  }
  out << "  rhs_total     " << format_number(r.rhs_total) << "\n";
  out << "  measured_lhs  " << format_number(r.measured_lhs) << " (stderr " << format_number(r.measured_stderr)
      << ")\n";
  out << "  holds         " << (r.holds ? "yes" : "no") << "\n";
  return out.str();
}

std::string to_text(const NacBoundReport& r) {
  std::ostringstream out;
  out << "actor-critic bound (" << to_string(r.mode) << "), T=" << r.T << " N=" << r.N
      << " B=" << format_number(r.radius) << " gamma=" << format_number(r.gamma) << " seeds=" << r.n_seeds << "\n";
  out << "  eps_nac                 " << format_number(r.eps_nac) << "\n";
  out << "  eps_actor               " << format_number(r.eps_actor) << "\n";
  out << "  eps_inf                 " << format_number(r.eps_inf) << "\n";
  out << "  eps_grad                " << format_number(r.eps_grad) << "\n";
  out << "  avg_eps_critic          " << format_number(r.avg_eps_critic) << "\n";
  out << "  concentrability         " << (r.concentrability.infinite ? "inf" : format_number(r.concentrability.value))
      << "\n";
  out << "  rhs_total               " << format_number(r.rhs_total) << "\n";
  out << "  measured_suboptimality  " << format_number(r.measured_suboptimality) << "\n";
  out << "  holds                   " << (r.holds ? "yes" : "no") << "\n";
  return out.str();
}

}  // namespace aliased_ac
