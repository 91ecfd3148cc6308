#include "aliased_ac/agent_state.hpp"

#include <cmath>

#include <json.hpp>

#include "aliased_ac/error.hpp"
#include "detail/json_io.hpp"
#include "detail/stochastic.hpp"

namespace aliased_ac {

std::string_view to_string(AgentStateKind kind) {
  switch (kind) {
    case AgentStateKind::custom: return "custom";
    case AgentStateKind::last_obs: return "last_obs";
    case AgentStateKind::window: return "window";
    case AgentStateKind::state_revealing: return "state_revealing";
  }
  return "custom";
}

AgentStateProcess::AgentStateProcess(int n_agent_states, int n_actions, int n_obs, RowMatrix update,
                                     RowMatrix init, AgentStateKind kind, std::vector<std::string> labels)
    : n_agent_states_(n_agent_states),
      n_actions_(n_actions),
      n_obs_(n_obs),
      update_(std::move(update)),
      init_(std::move(init)),
      kind_(kind),
      labels_(std::move(labels)) {
  if (n_agent_states_ <= 0) throw ValidationError("n_agent_states must be positive");
  const Eigen::Index rows = static_cast<Eigen::Index>(n_agent_states_) * n_actions_ * n_obs_;
  if (update_.rows() != rows || update_.cols() != n_agent_states_) {
    throw ValidationError("update table must have " + std::to_string(rows) + " rows of length " +
                          std::to_string(n_agent_states_));
  }
  if (init_.rows() != n_obs_ || init_.cols() != n_agent_states_) {
    throw ValidationError("init table must be " + std::to_string(n_obs_) + "x" + std::to_string(n_agent_states_));
  }
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n_agent_states_) {
    throw ValidationError("agent-state labels must have one entry per agent state");
  }

  successor_.reserve(static_cast<std::size_t>(rows + n_obs_));
  auto check = [&](RowMatrix& table, Eigen::Index r, const std::string& name) {
    double* row = table.data() + r * n_agent_states_;
    detail::normalize_simplex(row, n_agent_states_, name);
    if (!detail::is_one_hot(row, n_agent_states_)) deterministic_ = false;
    Eigen::Index arg = 0;
    table.row(r).maxCoeff(&arg);
    successor_.push_back(static_cast<int>(arg));
  };
  for (int z = 0; z < n_agent_states_; ++z) {
    for (int a = 0; a < n_actions_; ++a) {
      for (int o = 0; o < n_obs_; ++o) {
        check(update_, (static_cast<Eigen::Index>(z) * n_actions_ + a) * n_obs_ + o,
              "update[" + std::to_string(z) + "][" + std::to_string(a) + "][" + std::to_string(o) + "]");
      }
    }
  }
  for (int o = 0; o < n_obs_; ++o) check(init_, o, "init[" + std::to_string(o) + "]");
}

std::size_t AgentStateProcess::row_of(int z, int a, int o) const {
  if (z == null_state() && a == null_action()) {
    return static_cast<std::size_t>(update_.rows()) + static_cast<std::size_t>(o);
  }
  return (static_cast<std::size_t>(z) * n_actions_ + a) * n_obs_ + o;
}

std::span<const double> AgentStateProcess::kernel(int z, int a, int o) const {
  if (z == null_state() && a == null_action()) return row_span(init_, o);
  return row_span(update_, static_cast<Eigen::Index>(row_of(z, a, o)));
}

int init_state(const AgentStateProcess& asp, int o0, Rng& rng) {
  return update(asp, asp.null_state(), asp.null_action(), o0, rng);
}

int update(const AgentStateProcess& asp, int z, int a, int o_next, Rng& rng) {
  if (asp.deterministic()) return asp.next_deterministic(z, a, o_next);
  return rng.categorical(asp.kernel(z, a, o_next));
}

AgentStateProcess make_last_observation(const Pomdp& pomdp) {
  const int O = pomdp.n_obs();
  const int A = pomdp.n_actions();
  RowMatrix update = RowMatrix::Zero(static_cast<Eigen::Index>(O) * A * O, O);
  for (int z = 0; z < O; ++z) {
    for (int a = 0; a < A; ++a) {
      for (int o = 0; o < O; ++o) update((static_cast<Eigen::Index>(z) * A + a) * O + o, o) = 1.0;
    }
  }
  RowMatrix init = RowMatrix::Identity(O, O);
  return AgentStateProcess(O, A, O, std::move(update), std::move(init), AgentStateKind::last_obs,
                           pomdp.labels().observations);
}

WindowCodec::WindowCodec(int n_obs, int n_actions, int k) : n_obs_(n_obs), n_actions_(n_actions), k_(k) {
  if (k < 1) throw ValidationError("window length must be >= 1");
  offsets_.resize(static_cast<std::size_t>(k));
  std::int64_t total = 0;
  std::int64_t block = n_obs;  // windows with j pairs: n_obs * (n_obs*n_actions)^j
  for (int j = 0; j < k; ++j) {
    offsets_[static_cast<std::size_t>(j)] = static_cast<int>(total);
    total += block;
    block *= static_cast<std::int64_t>(n_obs) * n_actions;
    if (total > (1LL << 30)) throw CapExceededError("window enumeration too large");
  }
  size_ = static_cast<int>(total);
}

int WindowCodec::encode(const Window& window) const {
  const int j = static_cast<int>(window.pairs.size());
  int code = 0;
  for (const auto& [o, a] : window.pairs) code = (code * n_obs_ + o) * n_actions_ + a;
  return offsets_[static_cast<std::size_t>(j)] + code * n_obs_ + window.last_obs;
}

Window WindowCodec::decode(int index) const {
  int j = k_ - 1;
  while (j > 0 && index < offsets_[static_cast<std::size_t>(j)]) --j;
  int code = index - offsets_[static_cast<std::size_t>(j)];
  Window window;
  window.last_obs = code % n_obs_;
  code /= n_obs_;
  window.pairs.resize(static_cast<std::size_t>(j));
  for (int i = j - 1; i >= 0; --i) {
    const int a = code % n_actions_;
    code /= n_actions_;
    const int o = code % n_obs_;
    code /= n_obs_;
    window.pairs[static_cast<std::size_t>(i)] = {o, a};
  }
  return window;
}

Window WindowCodec::shift(const Window& window, int action, int obs) const {
  Window next;
  next.pairs = window.pairs;
  next.pairs.emplace_back(window.last_obs, action);
  if (static_cast<int>(next.pairs.size()) > k_ - 1) next.pairs.erase(next.pairs.begin());
  next.last_obs = obs;
  return next;
}

std::string WindowCodec::label(const Window& window, const Pomdp* pomdp) const {
  auto obs_name = [&](int o) {
    if (pomdp && !pomdp->labels().observations.empty()) return pomdp->labels().observations[o];
    return "o" + std::to_string(o);
  };
  auto act_name = [&](int a) {
    if (pomdp && !pomdp->labels().actions.empty()) return pomdp->labels().actions[a];
    return "a" + std::to_string(a);
  };
  std::string out = "(";
  for (int pad = static_cast<int>(window.pairs.size()); pad < k_ - 1; ++pad) out += "_,_,";
  for (const auto& [o, a] : window.pairs) out += obs_name(o) + "," + act_name(a) + ",";
  return out + obs_name(window.last_obs) + ")";
}

AgentStateProcess make_sliding_window(const Pomdp& pomdp, int k, std::int64_t size_cap) {
  if (k < 1) throw ValidationError("window length must be >= 1");
  const int O = pomdp.n_obs();
  const int A = pomdp.n_actions();
  double padded = std::pow(O + 1.0, k) * std::pow(A + 1.0, k - 1);
  if (padded > static_cast<double>(size_cap)) {
    throw CapExceededError("sliding window of length " + std::to_string(k) + " needs " +
                           std::to_string(static_cast<long long>(padded)) + " padded windows, cap is " +
                           std::to_string(size_cap));
  }
  const WindowCodec codec(O, A, k);
  const int Z = codec.size();
  RowMatrix update = RowMatrix::Zero(static_cast<Eigen::Index>(Z) * A * O, Z);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(Z));
  for (int z = 0; z < Z; ++z) {
    const Window window = codec.decode(z);
    labels.push_back(codec.label(window, &pomdp));
    for (int a = 0; a < A; ++a) {
      for (int o = 0; o < O; ++o) {
        update((static_cast<Eigen::Index>(z) * A + a) * O + o, codec.encode(codec.shift(window, a, o))) = 1.0;
      }
    }
  }
  RowMatrix init = RowMatrix::Zero(O, Z);
  for (int o = 0; o < O; ++o) init(o, codec.encode(Window{{}, o})) = 1.0;
  return AgentStateProcess(Z, A, O, std::move(update), std::move(init), AgentStateKind::window, std::move(labels));
}

std::pair<Pomdp, AgentStateProcess> make_state_revealing(const Pomdp& pomdp) {
  const int S = pomdp.n_states();
  std::vector<RowMatrix> transition;
  std::vector<RowMatrix> reward;
  for (int a = 0; a < pomdp.n_actions(); ++a) {
    transition.push_back(pomdp.transition(a));
    reward.push_back(pomdp.reward(a));
  }
  PomdpLabels labels = pomdp.labels();
  labels.observations = labels.states;
  Pomdp revealed(pomdp.initial(), std::move(transition), std::move(reward), RowMatrix::Identity(S, S),
                 pomdp.gamma(), std::move(labels));
  AgentStateProcess asp = make_last_observation(revealed);
  AgentStateProcess tagged(asp.n_agent_states(), asp.n_actions(), asp.n_obs(), asp.update_table(), asp.init_table(),
                           AgentStateKind::state_revealing, asp.labels());
  return {std::move(revealed), std::move(tagged)};
}

AgentStateProcess load_agent_state_process(std::string_view json_text, const Pomdp& pomdp) {
  const detail::JsonReader doc(json_text);
  const auto& root = doc.root();
  doc.require_object(root, "");

  if (root.contains("kind")) {
    const auto& kind_node = root.at("kind");
    if (!kind_node.is_string()) throw ParseError("expected a string", 0, "kind");
    const std::string kind = kind_node.get<std::string>();
    if (kind == "last_obs") return make_last_observation(pomdp);
    if (kind == "window") return make_sliding_window(pomdp, doc.positive_int(root, "k"));
    if (kind == "state_revealing") {
      if (pomdp.n_obs() != pomdp.n_states()) {
        throw ValidationError("state_revealing agent state needs the state-revealing POMDP (n_obs == n_states)");
      }
      return make_state_revealing(pomdp).second;
    }
    throw ParseError("unknown kind '" + kind + "'", 0, "kind");
  }

  const int Z = doc.positive_int(root, "n_agent_states");
  const int A = pomdp.n_actions();
  const int O = pomdp.n_obs();
  const auto& update_node = doc.array_of(doc.member(root, "update", "update"), "update", Z);
  RowMatrix update(static_cast<Eigen::Index>(Z) * A * O, Z);
  for (int z = 0; z < Z; ++z) {
    const std::string fz = "update[" + std::to_string(z) + "]";
    const auto& by_action = doc.array_of(update_node[z], fz, A);
    for (int a = 0; a < A; ++a) {
      const std::string fa = fz + "[" + std::to_string(a) + "]";
      const auto& by_obs = doc.array_of(by_action[a], fa, O);
      for (int o = 0; o < O; ++o) {
        doc.fill_row(by_obs[o], fa + "[" + std::to_string(o) + "]", Z,
                     update.data() + ((static_cast<Eigen::Index>(z) * A + a) * O + o) * Z);
      }
    }
  }
  RowMatrix init = doc.matrix(root, "init", O, Z);
  std::vector<std::string> labels = doc.string_list(root, "labels", "labels");
  return AgentStateProcess(Z, A, O, std::move(update), std::move(init), AgentStateKind::custom, std::move(labels));
}

std::string to_json(const AgentStateProcess& asp) {
  const int Z = asp.n_agent_states();
  const int A = asp.n_actions();
  const int O = asp.n_obs();
  nlohmann::ordered_json out;
  out["n_agent_states"] = Z;
  nlohmann::ordered_json update = nlohmann::ordered_json::array();
  for (int z = 0; z < Z; ++z) {
    nlohmann::ordered_json by_action = nlohmann::ordered_json::array();
    for (int a = 0; a < A; ++a) {
      nlohmann::ordered_json by_obs = nlohmann::ordered_json::array();
      for (int o = 0; o < O; ++o) {
        const auto row = asp.kernel(z, a, o);
        by_obs.push_back(nlohmann::ordered_json(std::vector<double>(row.begin(), row.end())));
      }
      by_action.push_back(std::move(by_obs));
    }
    update.push_back(std::move(by_action));
  }
  out["update"] = std::move(update);
  out["init"] = detail::to_json_array(asp.init_table());
  if (!asp.labels().empty()) out["labels"] = asp.labels();
  return out.dump(2) + "\n";
}

AgentStateProcess resolve_agent_state(const std::string& spec, const Pomdp& pomdp) {
  if (spec == "last_obs") return make_last_observation(pomdp);
  if (spec.rfind("window:", 0) == 0) return make_sliding_window(pomdp, std::stoi(spec.substr(7)));
  if (spec == "state_revealing") {
    if (pomdp.n_obs() != pomdp.n_states()) {
      throw ValidationError("state_revealing agent state needs the state-revealing POMDP");
    }
    return make_state_revealing(pomdp).second;
  }
  return load_agent_state_process(detail::read_text_file(spec), pomdp);
}

AgentStateProcess random_agent_state_process(int n_agent_states, int n_actions, int n_obs, std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](RowMatrix& table) {
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
      double total = 0.0;
      for (Eigen::Index c = 0; c < table.cols(); ++c) {
        table(r, c) = -std::log(rng.uniform_positive());
        total += table(r, c);
      }
      table.row(r) /= total;
    }
  };
  RowMatrix update(static_cast<Eigen::Index>(n_agent_states) * n_actions * n_obs, n_agent_states);
  RowMatrix init(n_obs, n_agent_states);
  fill(update);
  fill(init);
  return AgentStateProcess(n_agent_states, n_actions, n_obs, std::move(update), std::move(init),
                           AgentStateKind::custom);
}

}  // namespace aliased_ac
