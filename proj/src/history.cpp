#include "aliased_ac/history.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "aliased_ac/bounds.hpp"
#include "aliased_ac/error.hpp"

namespace aliased_ac {

Vector belief_update(const Pomdp& pomdp, const Vector& belief, int action, int obs) {
  const int S = pomdp.n_states();
  Vector next = Vector::Zero(S);
  for (int s = 0; s < S; ++s) {
    if (belief[s] == 0.0) continue;
    for (int s2 = 0; s2 < S; ++s2) next[s2] += belief[s] * pomdp.T(s, action, s2);
  }
  for (int s2 = 0; s2 < S; ++s2) next[s2] *= pomdp.O(s2, obs);
  const double total = next.sum();
  if (!(total > 0.0)) throw ZeroLikelihoodError("history has zero likelihood");
  return next / total;
}

Vector belief_filter(const Pomdp& pomdp, const History& history) {
  const int S = pomdp.n_states();
  Vector belief(S);
  for (int s = 0; s < S; ++s) belief[s] = pomdp.initial()[s] * pomdp.O(s, history.first_obs);
  const double total = belief.sum();
  if (!(total > 0.0)) throw ZeroLikelihoodError("initial observation has zero likelihood");
  belief /= total;
  for (const auto& [a, o] : history.steps) belief = belief_update(pomdp, belief, a, o);
  return belief;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Node {
  Vector alpha;   // Pr(h, S_t = s, Z_t = z | start event), flat (s, z)
  Vector belief;  // b_t(. | h)
};

using Key = std::vector<long long>;

Key node_key(const Node& node) {
  Key key;
  key.reserve(static_cast<std::size_t>(node.alpha.size() + node.belief.size()));
  const double mass = node.alpha.sum();
  for (Eigen::Index i = 0; i < node.alpha.size(); ++i) key.push_back(std::llround(node.alpha[i] / mass * 1e12));
  for (Eigen::Index i = 0; i < node.belief.size(); ++i) key.push_back(std::llround(node.belief[i] * 1e12));
  return key;
}

class GapEvaluator {
 public:
  GapEvaluator(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
               const BeliefGapOptions& options, const VisitationMeasure* d)
      : pomdp_(pomdp), asp_(asp), policy_(policy), options_(options), d_(d) {
    S_ = pomdp.n_states();
    Z_ = asp.n_agent_states();
    last_time_ = options.horizon * options.stride;
    if (options.conditioning == GapConditioning::initial_distribution) {
      const JointChain chain = build_joint_chain(pomdp, asp, policy);
      for (int k = 0; k <= options.horizon; ++k) {
        approx_by_time_.push_back(approximate_beliefs(chain, k * options.stride));
      }
    } else {
      if (d == nullptr) throw ValidationError("visitation conditioning needs the visitation measure");
      RowMatrix cond(Z_, S_);
      const Vector marginal = d->agent_state_marginal();
      for (int z = 0; z < Z_; ++z) {
        for (int s = 0; s < S_; ++s) cond(z, s) = marginal[z] > 0.0 ? (*d)(s, z) / marginal[z] : kNaN;
      }
      approx_by_time_.push_back(std::move(cond));
    }
  }

  const RowMatrix& approx_at(int k) const {
    return approx_by_time_.size() == 1 ? approx_by_time_.front() : approx_by_time_[static_cast<std::size_t>(k)];
  }

  /// TV to the approximate belief of z; 1 when that belief is undefined.
  double gap(int k, int z, const Vector& belief) const {
    const RowMatrix& approx = approx_at(k);
    if (std::isnan(approx(z, 0))) return 1.0;
    double total = 0.0;
    for (int s = 0; s < S_; ++s) total += std::abs(approx(z, s) - belief[s]);
    return 0.5 * total;
  }

  double node_gap(int k, const Node& node) const {
    double total = 0.0;
    for (int z = 0; z < Z_; ++z) {
      double mass = 0.0;
      for (int s = 0; s < S_; ++s) mass += node.alpha[s * Z_ + z];
      if (mass > 0.0) total += mass * gap(k, z, node.belief);
    }
    return total;
  }

  /// Sum over nodes of mass * discounted gaps; nullopt when the cap is hit.
  std::optional<double> enumerate(std::vector<Node> level) {
    const int A = pomdp_.n_actions();
    const int O = pomdp_.n_obs();
    double total = 0.0;
    for (int t = 0; t <= last_time_; ++t) {
      peak_nodes_ = std::max<std::int64_t>(peak_nodes_, static_cast<std::int64_t>(level.size()));
      if (t % options_.stride == 0) {
        const double weight = std::pow(options_.discount, t);
        for (const auto& node : level) total += weight * node_gap(t / options_.stride, node);
      }
      if (t == last_time_) break;

      std::map<Key, std::size_t> index;
      std::vector<Node> next_level;
      for (const auto& node : level) {
        for (int a = 0; a < A; ++a) {
          for (int o = 0; o < O; ++o) {
            Vector alpha = Vector::Zero(S_ * Z_);
            for (int s = 0; s < S_; ++s) {
              for (int z = 0; z < Z_; ++z) {
                const double w = node.alpha[s * Z_ + z] * policy_(z, a);
                if (w == 0.0) continue;
                const auto u = asp_.kernel(z, a, o);
                for (int s2 = 0; s2 < S_; ++s2) {
                  const double p = w * pomdp_.T(s, a, s2) * pomdp_.O(s2, o);
                  if (p == 0.0) continue;
                  for (int z2 = 0; z2 < Z_; ++z2) {
                    if (u[z2] != 0.0) alpha[s2 * Z_ + z2] += p * u[z2];
                  }
                }
              }
            }
            if (!(alpha.sum() > 0.0)) continue;
            Node child{std::move(alpha), belief_update(pomdp_, node.belief, a, o)};
            Key key = node_key(child);
            const auto [it, inserted] = index.try_emplace(std::move(key), next_level.size());
            if (inserted) {
              next_level.push_back(std::move(child));
            } else {
              next_level[it->second].alpha += child.alpha;
            }
          }
        }
        if (static_cast<std::int64_t>(next_level.size()) > options_.node_cap) return std::nullopt;
      }
      level = std::move(next_level);
    }
    return total;
  }

  /// Monte Carlo estimate of the same sum for one start sampler.
  template <typename StartSampler>
  double simulate(StartSampler&& start, Rng& rng, int episodes) {
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
      auto [s, z, belief] = start(rng);
      double sum = 0.0;
      for (int t = 0; t <= last_time_; ++t) {
        if (t % options_.stride == 0) sum += std::pow(options_.discount, t) * gap(t / options_.stride, z, belief);
        if (t == last_time_) break;
        const int a = sample_action(policy_, z, rng);
        const TransitionSample next = step(pomdp_, s, a, rng);
        z = update(asp_, z, a, next.observation, rng);
        s = next.next_state;
        belief = belief_update(pomdp_, belief, a, next.observation);
      }
      total += sum;
    }
    return total / episodes;
  }

  int S_ = 0;
  int Z_ = 0;
  int last_time_ = 0;
  std::int64_t peak_nodes_ = 0;

 private:
  const Pomdp& pomdp_;
  const AgentStateProcess& asp_;
  const TabularPolicy& policy_;
  const BeliefGapOptions& options_;
  const VisitationMeasure* d_;
  std::vector<RowMatrix> approx_by_time_;
};

struct Start {
  int state;
  int agent_state;
  Vector belief;
};

}  // namespace

BeliefGapResult expected_belief_gap(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy,
                                    const BeliefGapOptions& options, const VisitationMeasure* d) {
  if (options.horizon < 0 || options.stride < 1) throw ValidationError("belief gap needs horizon >= 0, stride >= 1");
  GapEvaluator eval(pomdp, asp, policy, options, d);
  const int S = eval.S_;
  const int Z = eval.Z_;
  const int O = pomdp.n_obs();

  BeliefGapResult result;
  result.per_agent_state = Vector::Constant(Z, kNaN);
  const double step_discount = std::pow(options.discount, options.stride);
  result.tail = step_discount < 1.0 ? std::pow(step_discount, options.horizon + 1) / (1.0 - step_discount)
                                    : std::numeric_limits<double>::infinity();

  Rng rng(options.seed);
  bool fell_back = false;
  auto evaluate = [&](std::vector<Node> roots, double mass, auto&& sampler) -> double {
    if (!fell_back) {
      if (auto exact = eval.enumerate(std::move(roots))) return *exact / mass;
      if (!options.monte_carlo_fallback) {
        throw CapExceededError("history enumeration exceeded " + std::to_string(options.node_cap) +
                               " live histories; enable the Monte Carlo fallback or lower the horizon");
      }
      fell_back = true;
    }
    return eval.simulate(sampler, rng, options.monte_carlo_episodes);
  };

  if (options.conditioning == GapConditioning::initial_distribution) {
    // weights of (s0, o0, z0)
    auto start_weight = [&](int s, int o, int z) {
      return pomdp.initial()[s] * pomdp.O(s, o) * asp.kernel(asp.null_state(), asp.null_action(), o)[z];
    };
    auto initial_belief = [&](int o) {
      Vector b(S);
      for (int s = 0; s < S; ++s) b[s] = pomdp.initial()[s] * pomdp.O(s, o);
      return Vector(b / b.sum());
    };
    auto roots_for = [&](int only_z) {
      std::vector<Node> roots;
      for (int o = 0; o < O; ++o) {
        Vector alpha = Vector::Zero(S * Z);
        for (int s = 0; s < S; ++s) {
          for (int z = 0; z < Z; ++z) {
            if (only_z >= 0 && z != only_z) continue;
            alpha[s * Z + z] = start_weight(s, o, z);
          }
        }
        if (alpha.sum() > 0.0) roots.push_back({std::move(alpha), initial_belief(o)});
      }
      return roots;
    };
    auto sampler_for = [&](int only_z) {
      return [&, only_z](Rng& r) {
        std::vector<double> w;
        for (int s = 0; s < S; ++s) {
          for (int o = 0; o < O; ++o) {
            for (int z = 0; z < Z; ++z) w.push_back(only_z >= 0 && z != only_z ? 0.0 : start_weight(s, o, z));
          }
        }
        double total = 0.0;
        for (double x : w) total += x;
        for (double& x : w) x /= total;
        const int idx = r.categorical(w);
        const int z = idx % Z;
        const int o = (idx / Z) % O;
        const int s = idx / (Z * O);
        return Start{s, z, initial_belief(o)};
      };
    };

    for (int z = 0; z < Z; ++z) {
      double mass = 0.0;
      for (int s = 0; s < S; ++s) {
        for (int o = 0; o < O; ++o) mass += start_weight(s, o, z);
      }
      if (mass > 0.0) result.per_agent_state[z] = evaluate(roots_for(z), mass, sampler_for(z));
    }
    result.unconditional = evaluate(roots_for(-1), 1.0, sampler_for(-1));
  } else {
    if (d == nullptr) throw ValidationError("visitation conditioning needs the visitation measure");
    const Vector marginal = d->agent_state_marginal();
    double mixture = 0.0;
    for (int z = 0; z < Z; ++z) {
      if (!(marginal[z] > 0.0)) continue;
      const Vector cond = d->conditional_state(z);
      Vector alpha = Vector::Zero(S * Z);
      for (int s = 0; s < S; ++s) alpha[s * Z + z] = cond[s];
      auto sampler = [&, z](Rng& r) {
        const int s = r.categorical({cond.data(), static_cast<std::size_t>(S)});
        return Start{s, z, cond};
      };
      std::vector<Node> roots{{std::move(alpha), cond}};
      result.per_agent_state[z] = evaluate(std::move(roots), 1.0, sampler);
      mixture += marginal[z] * result.per_agent_state[z];
    }
    result.unconditional = mixture;
  }
  result.monte_carlo = fell_back;
  result.peak_nodes = eval.peak_nodes_;
  return result;
}

}  // namespace aliased_ac
