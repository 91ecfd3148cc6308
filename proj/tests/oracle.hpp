#pragma once

// Slow reference computations used to freeze expected values. They only read
// the model tables and iterate; none of the library solvers are called.

#include <cmath>
#include <vector>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/tabular_policy.hpp"

namespace ref {

using namespace aliased_ac;

/// P(s0, z0) flattened s * Z + z.
inline std::vector<double> initial_pairs(const Pomdp& p, const AgentStateProcess& u) {
  const int S = p.n_states(), Z = u.n_agent_states();
  std::vector<double> out(S * Z, 0.0);
  for (int s = 0; s < S; ++s)
    for (int o = 0; o < p.n_obs(); ++o)
      for (int z = 0; z < Z; ++z) out[s * Z + z] += p.initial()[s] * p.O(s, o) * u.U(z, u.null_state(), u.null_action(), o);
  return out;
}

/// Pr((s,z) -> (s',z')) under pi.
inline double pair_kernel(const Pomdp& p, const AgentStateProcess& u, const TabularPolicy& pi, int s, int z, int a,
                          int s2, int z2) {
  double total = 0.0;
  for (int o = 0; o < p.n_obs(); ++o) total += p.T(s, a, s2) * p.O(s2, o) * u.U(z2, z, a, o);
  (void)pi;
  return total;
}

/// Discounted visitation by truncated power series.
inline std::vector<double> visitation(const Pomdp& p, const AgentStateProcess& u, const TabularPolicy& pi) {
  const int S = p.n_states(), Z = u.n_agent_states(), A = p.n_actions();
  std::vector<double> mu = initial_pairs(p, u), d(S * Z, 0.0);
  double w = 1.0 - p.gamma();
  for (int t = 0; t < 3000; ++t) {
    for (int i = 0; i < S * Z; ++i) d[i] += w * mu[i];
    std::vector<double> next(S * Z, 0.0);
    for (int s = 0; s < S; ++s)
      for (int z = 0; z < Z; ++z) {
        if (mu[s * Z + z] == 0.0) continue;
        for (int a = 0; a < A; ++a)
          for (int s2 = 0; s2 < S; ++s2)
            for (int z2 = 0; z2 < Z; ++z2)
              next[s2 * Z + z2] += mu[s * Z + z] * pi(z, a) * pair_kernel(p, u, pi, s, z, a, s2, z2);
      }
    mu = next;
    w *= p.gamma();
  }
  return d;
}

/// Q(s,z,a) by value iteration, flat (s * Z + z) * A + a.
inline std::vector<double> q_asym(const Pomdp& p, const AgentStateProcess& u, const TabularPolicy& pi) {
  const int S = p.n_states(), Z = u.n_agent_states(), A = p.n_actions();
  std::vector<double> q(S * Z * A, 0.0);
  for (int it = 0; it < 3000; ++it) {
    std::vector<double> next(q.size(), 0.0);
    for (int s = 0; s < S; ++s)
      for (int z = 0; z < Z; ++z)
        for (int a = 0; a < A; ++a) {
          double v = p.expected_reward(s, a);
          for (int s2 = 0; s2 < S; ++s2)
            for (int z2 = 0; z2 < Z; ++z2) {
              const double k = pair_kernel(p, u, pi, s, z, a, s2, z2);
              if (k == 0.0) continue;
              for (int a2 = 0; a2 < A; ++a2) v += p.gamma() * k * pi(z2, a2) * q[(s2 * Z + z2) * A + a2];
            }
          next[(s * Z + z) * A + a] = v;
        }
    q = next;
  }
  return q;
}

/// m-step symmetric fixed point by iteration, flat z * A + a. Rows of
/// unvisited z stay 0.
inline std::vector<double> q_sym_fixed(const Pomdp& p, const AgentStateProcess& u, const TabularPolicy& pi, int m) {
  const int S = p.n_states(), Z = u.n_agent_states(), A = p.n_actions();
  const std::vector<double> d = visitation(p, u, pi);
  std::vector<double> q(Z * A, 0.0);
  for (int it = 0; it < 3000; ++it) {
    std::vector<double> next(Z * A, 0.0);
    for (int z = 0; z < Z; ++z) {
      double mass = 0.0;
      for (int s = 0; s < S; ++s) mass += d[s * Z + z];
      if (mass == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        // distribution over (s,z,a) after fixing (z,a) and s ~ d(.|z)
        std::vector<double> x((S * Z) * A, 0.0);
        for (int s = 0; s < S; ++s) x[(s * Z + z) * A + a] = d[s * Z + z] / mass;
        double v = 0.0;
        for (int step = 0; step < m; ++step) {
          std::vector<double> y(x.size(), 0.0);
          for (int s = 0; s < S; ++s)
            for (int zz = 0; zz < Z; ++zz)
              for (int aa = 0; aa < A; ++aa) {
                const double w = x[(s * Z + zz) * A + aa];
                if (w == 0.0) continue;
                v += std::pow(p.gamma(), step) * w * p.expected_reward(s, aa);
                for (int s2 = 0; s2 < S; ++s2)
                  for (int z2 = 0; z2 < Z; ++z2) {
                    const double k = pair_kernel(p, u, pi, s, zz, aa, s2, z2);
                    if (k == 0.0) continue;
                    for (int a2 = 0; a2 < A; ++a2) y[(s2 * Z + z2) * A + a2] += w * k * pi(z2, a2);
                  }
              }
          x = y;
        }
        for (int s = 0; s < S; ++s)
          for (int z2 = 0; z2 < Z; ++z2)
            for (int a2 = 0; a2 < A; ++a2) v += std::pow(p.gamma(), m) * x[(s * Z + z2) * A + a2] * q[z2 * A + a2];
        next[z * A + a] = v;
      }
    }
    q = next;
  }
  return q;
}

}  // namespace ref
