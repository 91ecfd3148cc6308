#include "aliased_ac/td.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "aliased_ac/csv.hpp"
#include "aliased_ac/error.hpp"

namespace aliased_ac {

LinearCritic make_critic(const FeatureMap& features, CriticMode mode, double radius, int n_states,
                         int n_agent_states, int n_actions) {
  const int rows = feature_rows(mode, n_states, n_agent_states, n_actions);
  if (features.n_rows() != rows) {
    throw ValidationError(std::string(to_string(mode)) + " critic needs " + std::to_string(rows) +
                          " feature rows, got " + std::to_string(features.n_rows()));
  }
  return LinearCritic{Vector::Zero(features.dim()), radius, features, mode, n_states, n_agent_states, n_actions};
}

double TdConfig::step_size() const {
  return alpha ? *alpha : 1.0 / std::sqrt(static_cast<double>(K));
}

void TdConfig::validate() const {
  if (m < 1) throw ValidationError("m must be >= 1");
  if (K < 1) throw ValidationError("K must be >= 1");
  if (alpha && !(*alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
  if (!(radius > 0.0)) throw ValidationError("B must be > 0");
  if (eval_every < 0) throw ValidationError("eval_every must be >= 0");
}

Segment sample_segment(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m,
                       Rng& rng) {
  const DiscountedSample start = sample_discounted(pomdp, asp, policy, rng);
  Segment seg;
  seg.steps.reserve(static_cast<std::size_t>(m));
  int s = start.state;
  int z = start.agent_state;
  int a = sample_action(policy, z, rng);
  for (int i = 0; i < m; ++i) {
    const TransitionSample next = step(pomdp, s, a, rng);
    seg.steps.push_back({s, z, a, next.reward});
    z = update(asp, z, a, next.observation, rng);
    s = next.next_state;
    a = sample_action(policy, z, rng);
  }
  seg.state = s;
  seg.agent_state = z;
  seg.action = a;
  return seg;
}

SemiGradient td_semi_gradient(const LinearCritic& critic, const Segment& segment, double gamma) {
  const auto& first = segment.steps.front();
  double target = 0.0;
  double discount = 1.0;
  for (const auto& st : segment.steps) {
    target += discount * st.reward;
    discount *= gamma;
  }
  target += discount * critic.value(segment.state, segment.agent_state, segment.action);
  const int row = critic.row(first.state, first.agent_state, first.action);
  SemiGradient out;
  out.delta = target - critic.features.dot(critic.beta, row);
  out.g = out.delta * critic.features.table().row(row).transpose();
  return out;
}

Vector project_ball(const Vector& v, double radius) {
  const double norm = v.norm();
  if (norm <= radius) return v;
  return v * (radius / norm);
}

void write_csv(std::ostream& out, const TdTrace& trace) {
  bool with_error = false;
  for (const auto& r : trace.records) with_error = with_error || !std::isnan(r.measured_error);
  CsvWriter csv(out);
  if (with_error) {
    csv.header({"k", "delta", "g_norm", "beta_norm", "measured_error"});
  } else {
    csv.header({"k", "delta", "g_norm", "beta_norm"});
  }
  for (const auto& r : trace.records) {
    csv.cell(static_cast<long long>(r.k)).cell(r.delta).cell(r.g_norm).cell(r.beta_norm);
    if (with_error) {
      if (std::isnan(r.measured_error)) {
        csv.empty();
      } else {
        csv.cell(r.measured_error);
      }
    }
    csv.end_row();
  }
}

CriticOracle make_oracle(const QTable& exact, const VisitationMeasure& d, const TabularPolicy& policy) {
  return CriticOracle{&exact, sampling_weights(d, policy, exact.mode())};
}

namespace {

double oracle_error(const LinearCritic& critic, const Vector& beta, const CriticOracle& oracle) {
  const Vector values = critic.features.table() * beta;
  return weighted_norm(values - oracle.exact->values(), oracle.weights);
}

}  // namespace

TdResult td_learn(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                  const FeatureMap& features, const TdConfig& config, Rng& rng, const CriticOracle* oracle) {
  config.validate();
  LinearCritic critic = make_critic(features, config.mode, config.radius, pomdp.n_states(), asp.n_agent_states(),
                                    pomdp.n_actions());
  if (oracle != nullptr && oracle->exact->mode() != config.mode) {
    throw ValidationError("oracle table mode differs from the critic mode");
  }
  const double alpha = config.step_size();
  const double gamma = pomdp.gamma();
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  TdTrace trace;
  trace.records.reserve(static_cast<std::size_t>(config.K));
  Vector sum = Vector::Zero(features.dim());
  for (std::int64_t k = 0; k < config.K; ++k) {
    const Segment seg = sample_segment(pomdp, asp, policy, config.m, rng);
    const SemiGradient sg = td_semi_gradient(critic, seg, gamma);
    sum += critic.beta;
    TdRecord rec{k, sg.delta, sg.g.norm(), critic.beta.norm(), kNaN};
    if (oracle != nullptr && config.eval_every > 0 && (k + 1) % config.eval_every == 0) {
      rec.measured_error = oracle_error(critic, sum / static_cast<double>(k + 1), *oracle);
    }
    trace.records.push_back(rec);
    critic.beta = project_ball(critic.beta + alpha * sg.g, config.radius);
  }
  trace.beta_bar = sum / static_cast<double>(config.K);
  critic.beta = trace.beta_bar;
  if (oracle != nullptr) trace.final_error = oracle_error(critic, critic.beta, *oracle);
  return {std::move(critic), std::move(trace)};
}

double measured_critic_error(const LinearCritic& critic, const QTable& exact, const VisitationMeasure& d,
                             const TabularPolicy& policy) {
  if (exact.mode() != critic.mode) throw ValidationError("critic and exact table modes differ");
  if (exact.values().size() != critic.features.n_rows()) throw ValidationError("critic and table shapes differ");
  return weighted_norm(critic.table() - exact.values(), sampling_weights(d, policy, exact.mode()));
}

}  // namespace aliased_ac
