#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aliased_ac/rng.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

struct PomdpLabels {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;

  bool empty() const { return states.empty() && actions.empty() && observations.empty(); }
};

/// Finite POMDP (S, A, O, P, T, R, O, gamma) with dense tables.
///
/// transition(a)(s, s') = T(s'|s,a), reward(a)(s, s') = R(s,a,s'),
/// observation()(s, o) = O(o|s). Immutable after construction; the
/// constructor validates every row and throws ValidationError.
class Pomdp {
 public:
  Pomdp(Vector initial, std::vector<RowMatrix> transition, std::vector<RowMatrix> reward,
        RowMatrix observation, double gamma, PomdpLabels labels = {});

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int n_obs() const { return n_obs_; }
  double gamma() const { return gamma_; }

  const Vector& initial() const { return initial_; }
  const RowMatrix& transition(int a) const { return transition_[a]; }
  const RowMatrix& reward(int a) const { return reward_[a]; }
  const RowMatrix& observation() const { return observation_; }
  const PomdpLabels& labels() const { return labels_; }

  double T(int s, int a, int s_next) const { return transition_[a](s, s_next); }
  double R(int s, int a, int s_next) const { return reward_[a](s, s_next); }
  double O(int s, int o) const { return observation_(s, o); }

  /// r(s,a) = sum_s' T(s'|s,a) R(s,a,s').
  double expected_reward(int s, int a) const { return expected_reward_(s, a); }

  /// Index of a label, or -1.
  int state_index(std::string_view label) const;
  int action_index(std::string_view label) const;
  int obs_index(std::string_view label) const;

  /// Copy with a different discount factor.
  Pomdp with_gamma(double gamma) const;

 private:
  int n_states_;
  int n_actions_;
  int n_obs_;
  double gamma_;
  Vector initial_;
  std::vector<RowMatrix> transition_;
  std::vector<RowMatrix> reward_;
  RowMatrix observation_;
  RowMatrix expected_reward_;
  PomdpLabels labels_;
};

struct TransitionSample {
  int next_state;
  int observation;
  double reward;
};

/// s' ~ T(.|s,a), o' ~ O(.|s'), reward R(s,a,s'). Always consumes exactly two
/// draws from rng: the first selects s', the second o'.
TransitionSample step(const Pomdp& pomdp, int s, int a, Rng& rng);

/// s0 ~ P, o0 ~ O(.|s0). Two draws.
std::pair<int, int> initial_draw(const Pomdp& pomdp, Rng& rng);

/// Aliased Tiger: states {Treasure, Tiger, Left, Right}, actions
/// {Swap, Enter}, observations {Dark, Left, Right}.
Pomdp builtin_tiger(double gamma);

namespace tiger {
inline constexpr int kTreasure = 0;
inline constexpr int kTiger = 1;
inline constexpr int kLeft = 2;
inline constexpr int kRight = 3;

inline constexpr int kSwap = 0;
inline constexpr int kEnter = 1;

inline constexpr int kObsDark = 0;
inline constexpr int kObsLeft = 1;
inline constexpr int kObsRight = 2;
}  // namespace tiger

/// Random POMDP with Dirichlet(1)-like rows and uniform rewards in [0,1].
Pomdp random_pomdp(int n_states, int n_actions, int n_obs, double gamma, std::uint64_t seed);

/// Parses the JSON schema and validates. Throws ParseError or ValidationError.
Pomdp load_pomdp(std::string_view json_text);
Pomdp load_pomdp_file(const std::filesystem::path& path);

/// Canonical JSON text (fixed key order, shortest round-trip numbers).
std::string to_json(const Pomdp& pomdp);

/// Resolves "tiger" or a file path.
Pomdp resolve_pomdp(const std::string& source, double gamma_override = -1.0);

}  // namespace aliased_ac
