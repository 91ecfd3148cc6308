#include "aliased_ac/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aliased_ac/error.hpp"
#include "detail/json_io.hpp"
#include "detail/stochastic.hpp"

namespace aliased_ac {

namespace {

int find_label(const std::vector<std::string>& labels, std::string_view label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

void check_labels(const std::vector<std::string>& labels, int expected, const char* what) {
  if (!labels.empty() && static_cast<int>(labels.size()) != expected) {
    throw ValidationError(std::string("labels.") + what + " has " + std::to_string(labels.size()) +
                          " entries, expected " + std::to_string(expected));
  }
}

}  // namespace

Pomdp::Pomdp(Vector initial, std::vector<RowMatrix> transition, std::vector<RowMatrix> reward,
             RowMatrix observation, double gamma, PomdpLabels labels)
    : n_states_(static_cast<int>(initial.size())),
      n_actions_(static_cast<int>(transition.size())),
      n_obs_(static_cast<int>(observation.cols())),
      gamma_(gamma),
      initial_(std::move(initial)),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      observation_(std::move(observation)),
      labels_(std::move(labels)) {
  if (n_states_ <= 0) throw ValidationError("n_states must be positive");
  if (n_actions_ <= 0) throw ValidationError("n_actions must be positive");
  if (n_obs_ <= 0) throw ValidationError("n_obs must be positive");
  if (!(gamma_ >= 0.0)) throw ValidationError("gamma must be >= 0");
  if (!(gamma_ < 1.0)) throw ValidationError("gamma must be < 1");
  if (static_cast<int>(reward_.size()) != n_actions_) {
    throw ValidationError("reward has " + std::to_string(reward_.size()) + " action blocks, expected " +
                          std::to_string(n_actions_));
  }
  if (observation_.rows() != n_states_) {
    throw ValidationError("observation has " + std::to_string(observation_.rows()) + " rows, expected " +
                          std::to_string(n_states_));
  }

  detail::normalize_simplex(initial_.data(), n_states_, "initial");
  for (int a = 0; a < n_actions_; ++a) {
    auto& t = transition_[a];
    auto& r = reward_[a];
    if (t.rows() != n_states_ || t.cols() != n_states_) {
      throw ValidationError("transition[" + std::to_string(a) + "] must be " + std::to_string(n_states_) + "x" +
                            std::to_string(n_states_));
    }
    if (r.rows() != n_states_ || r.cols() != n_states_) {
      throw ValidationError("reward[" + std::to_string(a) + "] must be " + std::to_string(n_states_) + "x" +
                            std::to_string(n_states_));
    }
    for (int s = 0; s < n_states_; ++s) {
      detail::normalize_simplex(t.data() + s * n_states_, n_states_,
                                "transition[" + std::to_string(a) + "][" + std::to_string(s) + "]");
      for (int s2 = 0; s2 < n_states_; ++s2) {
        const double v = r(s, s2);
        if (!(v >= 0.0 && v <= 1.0)) {
          std::ostringstream msg;
          msg << "reward[" << a << "][" << s << "][" << s2 << "] = " << v << " outside [0, 1]";
          throw ValidationError(msg.str());
        }
      }
    }
  }
  for (int s = 0; s < n_states_; ++s) {
    detail::normalize_simplex(observation_.data() + s * n_obs_, n_obs_, "observation[" + std::to_string(s) + "]");
  }

  check_labels(labels_.states, n_states_, "states");
  check_labels(labels_.actions, n_actions_, "actions");
  check_labels(labels_.observations, n_obs_, "observations");

  expected_reward_.resize(n_states_, n_actions_);
  for (int a = 0; a < n_actions_; ++a) {
    expected_reward_.col(a) = transition_[a].cwiseProduct(reward_[a]).rowwise().sum();
  }
}

int Pomdp::state_index(std::string_view label) const { return find_label(labels_.states, label); }
int Pomdp::action_index(std::string_view label) const { return find_label(labels_.actions, label); }
int Pomdp::obs_index(std::string_view label) const { return find_label(labels_.observations, label); }

Pomdp Pomdp::with_gamma(double gamma) const {
  return Pomdp(initial_, transition_, reward_, observation_, gamma, labels_);
}

TransitionSample step(const Pomdp& pomdp, int s, int a, Rng& rng) {
  const int next = rng.categorical(row_span(pomdp.transition(a), s));
  const int obs = rng.categorical(row_span(pomdp.observation(), next));
  return {next, obs, pomdp.R(s, a, next)};
}

std::pair<int, int> initial_draw(const Pomdp& pomdp, Rng& rng) {
  const auto& p = pomdp.initial();
  const int s0 = rng.categorical({p.data(), static_cast<std::size_t>(p.size())});
  const int o0 = rng.categorical(row_span(pomdp.observation(), s0));
  return {s0, o0};
}

Pomdp builtin_tiger(double gamma) {
  using namespace tiger;
  constexpr int S = 4;
  std::vector<RowMatrix> transition(2, RowMatrix::Zero(S, S));
  std::vector<RowMatrix> reward(2, RowMatrix::Zero(S, S));
  for (int a : {kSwap, kEnter}) {
    transition[a](kTreasure, kTreasure) = 1.0;
    transition[a](kTiger, kTiger) = 1.0;
    reward[a].row(kTreasure).setOnes();
  }
  transition[kSwap](kLeft, kRight) = 1.0;
  transition[kSwap](kRight, kLeft) = 1.0;
  transition[kEnter](kLeft, kTreasure) = 1.0;
  transition[kEnter](kRight, kTiger) = 1.0;

  RowMatrix observation = RowMatrix::Zero(S, 3);
  observation(kTreasure, kObsDark) = 1.0;
  observation(kTiger, kObsDark) = 1.0;
  observation(kLeft, kObsLeft) = 1.0;
  observation(kRight, kObsRight) = 1.0;

  PomdpLabels labels{{"Treasure", "Tiger", "Left", "Right"}, {"Swap", "Enter"}, {"Dark", "Left", "Right"}};
  return Pomdp(Vector::Constant(S, 0.25), std::move(transition), std::move(reward), std::move(observation), gamma,
               std::move(labels));
}

Pomdp random_pomdp(int n_states, int n_actions, int n_obs, double gamma, std::uint64_t seed) {
  Rng rng(seed);
  auto dirichlet_row = [&](double* row, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      row[i] = -std::log(rng.uniform_positive());
      total += row[i];
    }
    for (int i = 0; i < n; ++i) row[i] /= total;
  };
  Vector initial(n_states);
  dirichlet_row(initial.data(), n_states);
  std::vector<RowMatrix> transition(n_actions, RowMatrix(n_states, n_states));
  std::vector<RowMatrix> reward(n_actions, RowMatrix(n_states, n_states));
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) dirichlet_row(transition[a].data() + s * n_states, n_states);
    for (int i = 0; i < n_states * n_states; ++i) reward[a].data()[i] = rng.uniform();
  }
  RowMatrix observation(n_states, n_obs);
  for (int s = 0; s < n_states; ++s) dirichlet_row(observation.data() + s * n_obs, n_obs);
  return Pomdp(std::move(initial), std::move(transition), std::move(reward), std::move(observation), gamma);
}

Pomdp load_pomdp(std::string_view json_text) {
  using detail::JsonReader;
  const JsonReader doc(json_text);
  const auto& root = doc.root();
  doc.require_object(root, "");

  const int n_states = doc.positive_int(root, "n_states");
  const int n_actions = doc.positive_int(root, "n_actions");
  const int n_obs = doc.positive_int(root, "n_obs");
  const double gamma = doc.number(root, "gamma", "gamma");

  Vector initial = doc.vector(root, "initial", n_states);
  std::vector<RowMatrix> transition = doc.cube(root, "transition", n_actions, n_states, n_states);
  std::vector<RowMatrix> reward = doc.cube(root, "reward", n_actions, n_states, n_states);
  RowMatrix observation = doc.matrix(root, "observation", n_states, n_obs);

  PomdpLabels labels;
  if (root.contains("labels")) {
    const auto& l = root.at("labels");
    doc.require_object(l, "labels");
    labels.states = doc.string_list(l, "states", "labels.states");
    labels.actions = doc.string_list(l, "actions", "labels.actions");
    labels.observations = doc.string_list(l, "observations", "labels.observations");
  }
  return Pomdp(std::move(initial), std::move(transition), std::move(reward), std::move(observation), gamma,
               std::move(labels));
}

Pomdp load_pomdp_file(const std::filesystem::path& path) {
  return load_pomdp(detail::read_text_file(path));
}

std::string to_json(const Pomdp& pomdp) {
  nlohmann::ordered_json out;
  out["n_states"] = pomdp.n_states();
  out["n_actions"] = pomdp.n_actions();
  out["n_obs"] = pomdp.n_obs();
  out["gamma"] = pomdp.gamma();
  out["initial"] = detail::to_json_array(pomdp.initial());
  auto cube = [&](auto&& block) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int a = 0; a < pomdp.n_actions(); ++a) arr.push_back(detail::to_json_array(block(a)));
    return arr;
  };
  out["transition"] = cube([&](int a) -> const RowMatrix& { return pomdp.transition(a); });
  out["reward"] = cube([&](int a) -> const RowMatrix& { return pomdp.reward(a); });
  out["observation"] = detail::to_json_array(pomdp.observation());
  if (!pomdp.labels().empty()) {
    nlohmann::ordered_json labels;
    labels["states"] = pomdp.labels().states;
    labels["actions"] = pomdp.labels().actions;
    labels["observations"] = pomdp.labels().observations;
    out["labels"] = std::move(labels);
  }
  return out.dump(2) + "\n";
}

Pomdp resolve_pomdp(const std::string& source, double gamma_override) {
  if (source == "tiger") return builtin_tiger(gamma_override >= 0.0 ? gamma_override : 0.9);
  Pomdp loaded = load_pomdp_file(source);
  return gamma_override >= 0.0 ? loaded.with_gamma(gamma_override) : loaded;
}

}  // namespace aliased_ac
