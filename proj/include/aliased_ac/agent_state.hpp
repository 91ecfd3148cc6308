#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/rng.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

enum class AgentStateKind { custom, last_obs, window, state_revealing };

std::string_view to_string(AgentStateKind kind);

/// Agent-state process M = (Z, U).
///
/// update() rows are indexed by (z * n_actions + a) * n_obs + o and hold
/// U(.|z, a, o). The null agent state is index n_agent_states() and the null
/// action is index n_actions(); kernel(null_state(), null_action(), o) is
/// the initialization row U(.|z_{-1}, a_{-1}, o).
class AgentStateProcess {
 public:
  AgentStateProcess(int n_agent_states, int n_actions, int n_obs, RowMatrix update, RowMatrix init,
                    AgentStateKind kind, std::vector<std::string> labels = {});

  int n_agent_states() const { return n_agent_states_; }
  int n_actions() const { return n_actions_; }
  int n_obs() const { return n_obs_; }
  AgentStateKind kind() const { return kind_; }
  const std::vector<std::string>& labels() const { return labels_; }

  int null_state() const { return n_agent_states_; }
  int null_action() const { return n_actions_; }

  /// True when every update and init row is one-hot.
  bool deterministic() const { return deterministic_; }

  std::span<const double> kernel(int z, int a, int o) const;
  double U(int z_next, int z, int a, int o) const { return kernel(z, a, o)[z_next]; }

  const RowMatrix& update_table() const { return update_; }
  const RowMatrix& init_table() const { return init_; }

  /// Successor of a deterministic kernel without touching any rng.
  int next_deterministic(int z, int a, int o) const { return successor_[row_of(z, a, o)]; }

 private:
  std::size_t row_of(int z, int a, int o) const;

  int n_agent_states_;
  int n_actions_;
  int n_obs_;
  RowMatrix update_;
  RowMatrix init_;
  AgentStateKind kind_;
  std::vector<std::string> labels_;
  bool deterministic_ = true;
  // argmax of every row; rows of update_ first then init_
  std::vector<int> successor_;
};

/// z0 ~ U(.|z_{-1}, a_{-1}, o0). Deterministic processes consume no draws,
/// stochastic ones consume one.
int init_state(const AgentStateProcess& asp, int o0, Rng& rng);

/// z' ~ U(.|z, a, o'). Same draw budget as init_state.
int update(const AgentStateProcess& asp, int z, int a, int o_next, Rng& rng);

/// Z = O with z' = o'.
AgentStateProcess make_last_observation(const Pomdp& pomdp);

/// Padded window (o_{t-k+1}, a_{t-k+1}, ..., a_{t-1}, o_t) of the last k
/// observations interleaved with the k-1 actions between them.
struct Window {
  std::vector<std::pair<int, int>> pairs;  // (observation, action), oldest first
  int last_obs = 0;

  bool operator==(const Window&) const = default;
};

/// Dense indexing of the windows reachable from the null state. Windows
/// whose padding is not a prefix can never occur and are not enumerated, so
/// |Z| = n_obs * sum_{j<k} (n_obs * n_actions)^j.
class WindowCodec {
 public:
  WindowCodec(int n_obs, int n_actions, int k);

  int size() const { return size_; }
  int k() const { return k_; }
  int encode(const Window& window) const;
  Window decode(int index) const;
  Window shift(const Window& window, int action, int obs) const;
  std::string label(const Window& window, const Pomdp* pomdp = nullptr) const;

 private:
  int n_obs_;
  int n_actions_;
  int k_;
  int size_;
  std::vector<int> offsets_;  // first index of windows with j pairs
};

/// Default cap on (n_obs+1)^k (n_actions+1)^(k-1) for sliding windows.
inline constexpr std::int64_t kDefaultWindowCap = 1 << 16;

AgentStateProcess make_sliding_window(const Pomdp& pomdp, int k, std::int64_t size_cap = kDefaultWindowCap);

/// Fully observable copy of the POMDP (O(o|s) = 1[o = s]) with its
/// last-observation process, so the agent state determines the state.
std::pair<Pomdp, AgentStateProcess> make_state_revealing(const Pomdp& pomdp);

/// Agent-state process JSON: either explicit tables
/// {"n_agent_states", "update" [z][a][o'][z'], "init" [o][z]} or a shortcut
/// {"kind": "last_obs" | "window" | "state_revealing", "k": ...}.
AgentStateProcess load_agent_state_process(std::string_view json_text, const Pomdp& pomdp);
std::string to_json(const AgentStateProcess& asp);

/// Resolves "last_obs", "window:<k>" or a JSON file path.
AgentStateProcess resolve_agent_state(const std::string& spec, const Pomdp& pomdp);

/// Random process with dense stochastic rows (tests and desk instances).
AgentStateProcess random_agent_state_process(int n_agent_states, int n_actions, int n_obs, std::uint64_t seed);

}  // namespace aliased_ac
