#include "aliased_ac/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "aliased_ac/bounds.hpp"
#include "aliased_ac/csv.hpp"
#include "aliased_ac/harness.hpp"
#include "aliased_ac/npg.hpp"
#include "aliased_ac/parallel.hpp"

namespace aliased_ac {

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void check(bool condition) { ok = ok && condition; }
};

std::string fmt(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4g", x);
  return buffer;
}

struct TigerSetting {
  Pomdp pomdp = builtin_tiger(0.9);
  AgentStateProcess asp = make_last_observation(pomdp);
  TabularPolicy enter = resolve_policy("enter_always", pomdp, asp);
};

// 1 ------------------------------------------------------------------------

void tiger_values(Outcome& o, const AcceptanceOptions&) {
  const TigerSetting t;
  const double g = t.pomdp.gamma();
  const VisitationMeasure d = discounted_visitation(build_joint_chain(t.pomdp, t.asp, t.enter), g);
  const QTable q = symmetric_q_true(t.pomdp, t.asp, t.enter, d);
  const QTable q_tilde = symmetric_fixed_point(t.pomdp, t.asp, t.enter, 1, d);
  const double v_expected[3] = {1.0 / (2.0 * (1.0 - g)), g / (1.0 - g), 0.0};
  const double vt_expected[3] = {1.0 / (2.0 * (1.0 - g)), g / (2.0 * (1.0 - g)), g / (2.0 * (1.0 - g))};
  double worst = 0.0;
  for (int z = 0; z < 3; ++z) {
    worst = std::max(worst, std::abs(q.state_value(z, t.enter) - v_expected[z]));
    worst = std::max(worst, std::abs(q_tilde.state_value(z, t.enter) - vt_expected[z]));
  }
  o.check(worst <= 1e-8);
  o.detail << "V=(" << fmt(q.state_value(0, t.enter)) << "," << fmt(q.state_value(1, t.enter)) << ","
           << fmt(q.state_value(2, t.enter)) << ") V_tilde=(" << fmt(q_tilde.state_value(0, t.enter)) << ","
           << fmt(q_tilde.state_value(1, t.enter)) << "," << fmt(q_tilde.state_value(2, t.enter))
           << ") max deviation " << fmt(worst);
}

// 2 ------------------------------------------------------------------------

void contraction(Outcome& o, const AcceptanceOptions& options) {
  struct Instance {
    Pomdp pomdp;
    AgentStateProcess asp;
    TabularPolicy policy;
  };
  std::vector<Instance> instances;
  {
    const TigerSetting t;
    instances.push_back({t.pomdp, t.asp, TabularPolicy::uniform(3, 2)});
    AgentStateProcess window = make_sliding_window(t.pomdp, 2);
    const int Z = window.n_agent_states();
    instances.push_back({t.pomdp, window, TabularPolicy::random(Z, 2, options.seed + 11)});
    const Pomdp random = random_pomdp(3, 2, 2, 0.9, options.seed + 12);
    instances.push_back(
        {random, random_agent_state_process(2, 2, 2, options.seed + 13), TabularPolicy::random(2, 2, options.seed + 14)});
  }
  double worst_excess = -1.0;
  Rng rng(options.seed + 15);
  for (const auto& inst : instances) {
    const StateActionModel model = build_state_action_model(inst.pomdp, inst.asp, inst.policy);
    const VisitationMeasure d =
        discounted_visitation(build_joint_chain(inst.pomdp, inst.asp, inst.policy), inst.pomdp.gamma());
    for (int m : {1, 2, 4}) {
      const SymmetricBellman op(model, d, m);
      const Eigen::Index n = static_cast<Eigen::Index>(inst.asp.n_agent_states()) * inst.pomdp.n_actions();
      double worst_ratio = 0.0;
      for (int k = 0; k < 100; ++k) {
        Vector q1(n), q2(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          q1[i] = 20.0 * rng.uniform() - 10.0;
          q2[i] = 20.0 * rng.uniform() - 10.0;
        }
        const double ratio = (op.apply(q1) - op.apply(q2)).cwiseAbs().maxCoeff() / (q1 - q2).cwiseAbs().maxCoeff();
        worst_ratio = std::max(worst_ratio, ratio);
      }
      const double bound = std::pow(inst.pomdp.gamma(), m);
      worst_excess = std::max(worst_excess, worst_ratio - bound);
      o.check(worst_ratio <= bound + 1e-10);
    }
  }
  o.detail << "3 instances x m in {1,2,4} x 100 pairs; max(ratio - gamma^m) = " << fmt(worst_excess);
}

// 3 ------------------------------------------------------------------------

void npg_identity(Outcome& o, const AcceptanceOptions& options) {
  double worst_identity = 0.0;
  double worst_rhs = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Pomdp pomdp = random_pomdp(3, 2, 2, 0.9, options.seed + 100 + i);
    const AgentStateProcess asp = random_agent_state_process(2, 2, 2, options.seed + 200 + i);
    Rng rng(options.seed + 300 + i);
    Vector theta(4);
    for (int k = 0; k < 4; ++k) theta[k] = rng.normal();
    const LogLinearPolicy policy(tabular_features(4), 2, 2, theta);
    const Vector w = exact_npg(policy, pomdp, asp);
    const Vector grad = finite_difference_gradient(policy, pomdp, asp);
    const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, policy.to_table()), pomdp.gamma());
    const Eigen::MatrixXd F = fisher_matrix(policy, d);
    worst_identity = std::max(worst_identity, (F * w - (1.0 - pomdp.gamma()) * grad).cwiseAbs().maxCoeff());
    const NpgNormalEquations eq = npg_normal_equations(policy, pomdp, asp);
    worst_rhs = std::max(worst_rhs, (eq.rhs_asymmetric - eq.rhs_symmetric).cwiseAbs().maxCoeff());
  }
  o.check(worst_identity <= 1e-5);
  o.check(worst_rhs <= 1e-10);
  o.detail << "max |F w* - (1-gamma) grad J| = " << fmt(worst_identity)
           << ", max |rhs_asym - rhs_sym| = " << fmt(worst_rhs);
}

// 4, 5 ---------------------------------------------------------------------

struct TdSweep {
  std::vector<BoundReport> reports;
  std::vector<double> fixed_point_rms;
  double aliasing_gap = 0.0;
};

TdSweep td_sweep(CriticMode mode, const AcceptanceOptions& options) {
  const TigerSetting t;
  const ExactTables tables = exact_tables(t.pomdp, t.asp, t.enter, 1);
  const FeatureMap features = tabular_features(feature_rows(mode, 4, 3, 2));
  const QTable& target = mode == CriticMode::asymmetric ? tables.q_asym : tables.q_sym;
  const CriticOracle oracle = make_oracle(target, tables.d, t.enter);
  const std::vector<std::int64_t> Ks = {1000, 10000, 100000};
  constexpr int kSeeds = 20;

  TdSweep out;
  out.aliasing_gap = weighted_distance(tables.q_sym, tables.q_tilde, tables.d, t.enter);
  for (std::size_t g = 0; g < Ks.size(); ++g) {
    TdConfig config;
    config.m = 1;
    config.K = Ks[g];
    config.radius = 15.0;
    config.mode = mode;
    std::vector<double> errors(kSeeds);
    std::vector<double> fixed(kSeeds);
    parallel_for(kSeeds, options.jobs, [&](std::size_t i) {
      TdConfig run = config;
      run.seed = derive_seed(options.seed + (mode == CriticMode::asymmetric ? 4 : 5), g, i);
      Rng rng(run.seed);
      const TdResult r = td_learn(t.pomdp, t.asp, t.enter, features, run, rng, &oracle);
      errors[i] = *r.trace.final_error;
      if (mode == CriticMode::symmetric) fixed[i] = measured_critic_error(r.critic, tables.q_tilde, tables.d, t.enter);
    });
    const CriticBoundTerms terms = critic_bound_terms(t.pomdp, t.asp, t.enter, features, config);
    out.reports.push_back(bound_report_td(errors, terms, config, t.pomdp.gamma(), GapConditioning::initial_distribution));
    double sq = 0.0;
    for (double e : fixed) sq += e * e;
    out.fixed_point_rms.push_back(std::sqrt(sq / kSeeds));
  }
  return out;
}

void describe_reports(Outcome& o, const TdSweep& s) {
  for (const auto& r : s.reports) {
    o.detail << "K=" << r.K << " lhs " << fmt(r.measured_lhs) << " <= rhs " << fmt(r.rhs_total) << "; ";
  }
}

void asymmetric_td(Outcome& o, const AcceptanceOptions& options) {
  const TdSweep s = td_sweep(CriticMode::asymmetric, options);
  for (const auto& r : s.reports) o.check(r.holds && r.eps_app == 0.0);
  for (std::size_t i = 1; i < s.reports.size(); ++i) {
    o.check(s.reports[i].measured_lhs < s.reports[i - 1].measured_lhs);
  }
  describe_reports(o, s);
  o.detail << "eps_app " << fmt(s.reports.back().eps_app);
}

void symmetric_td(Outcome& o, const AcceptanceOptions& options) {
  const TdSweep s = td_sweep(CriticMode::symmetric, options);
  for (const auto& r : s.reports) o.check(r.holds);
  const double to_fixed_point = s.fixed_point_rms.back();
  const double to_true = s.reports.back().measured_lhs;
  o.check(to_fixed_point <= 0.1);
  o.check(s.aliasing_gap > 0.0 && std::abs(to_true - s.aliasing_gap) <= 0.1);
  describe_reports(o, s);
  o.detail << "at K=1e5 ||Q_bar - Q_tilde||_d " << fmt(to_fixed_point) << " (need <= 0.1), ||Q_bar - Q||_d "
           << fmt(to_true) << " vs ||Q - Q_tilde||_d " << fmt(s.aliasing_gap) << " (need within 0.1)";
}

// 6 ------------------------------------------------------------------------

void aliasing_lemma(Outcome& o, const AcceptanceOptions&) {
  const TigerSetting t;
  for (int m : {1, 2, 4}) {
    const AliasingLemmaCheck c = aliasing_lemma_check(t.pomdp, t.asp, t.enter, m);
    o.check(c.holds);
    o.detail << "m=" << m << " " << fmt(c.lhs) << " <= " << fmt(c.rhs) << " + " << fmt(c.tail) << "; ";
  }
  const auto [wrapped, revealing] = make_state_revealing(t.pomdp);
  const TabularPolicy enter = resolve_policy("enter_always", wrapped, revealing);
  for (int m : {1, 2, 4}) {
    const AliasingLemmaCheck c = aliasing_lemma_check(wrapped, revealing, enter, m);
    o.check(c.holds && c.lhs == 0.0 && c.rhs == 0.0);
    if (c.lhs != 0.0 || c.rhs != 0.0) o.detail << "state-revealing m=" << m << " " << fmt(c.lhs) << " vs " << fmt(c.rhs) << "; ";
  }
  o.detail << "state-revealing wrapper 0 = 0";
}

// 7 ------------------------------------------------------------------------

void actor_critic(Outcome& o, const AcceptanceOptions& options) {
  const TigerSetting t;
  const OptimalPolicy best = brute_force_optimal(t.pomdp, t.asp);
  NacConfig config;
  config.T = 50;
  config.N = 2000;
  config.radius = 25.0;
  config.mode = CriticMode::asymmetric;
  config.td.m = 1;
  config.td.K = 50000;
  config.measure_critic = false;
  const FeatureMap phi = tabular_features(feature_rows(CriticMode::asymmetric, 4, 3, 2));
  const FeatureMap psi = tabular_features(6);
  constexpr int kSeeds = 10;
  std::vector<double> gaps(kSeeds);
  parallel_for(kSeeds, options.jobs, [&](std::size_t i) {
    NacConfig run = config;
    run.seed = derive_seed(options.seed + 7, 0, i);
    Rng rng(run.seed);
    const NacResult r = nac_run(t.pomdp, t.asp, phi, psi, run, rng);
    double best_J = -std::numeric_limits<double>::infinity();
    for (const auto& rec : r.trace.records) best_J = std::max(best_J, rec.J);
    gaps[i] = best.value - best_J;
  });
  std::vector<double> sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  const double med = 0.5 * (sorted[kSeeds / 2 - 1] + sorted[kSeeds / 2]);
  o.check(med <= 0.15 * best.value);
  o.detail << "J* " << fmt(best.value) << ", median min_t gap " << fmt(med) << " (limit " << fmt(0.15 * best.value)
           << "), B=25";
}

// 8 ------------------------------------------------------------------------

void vanishing_terms(Outcome& o, const AcceptanceOptions&) {
  const TigerSetting t;
  const auto [wrapped, revealing] = make_state_revealing(t.pomdp);
  const TabularPolicy policies[2] = {resolve_policy("enter_always", wrapped, revealing),
                                     TabularPolicy::uniform(revealing.n_agent_states(), 2)};
  double largest = 0.0;
  for (const auto& policy : policies) {
    for (int m : {1, 2, 4, 8}) largest = std::max(largest, eps_alias(wrapped, revealing, policy, m).value);
  }
  const OptimalPolicy wrapped_best = brute_force_optimal(wrapped, revealing);
  const double inf_sym = eps_inf(wrapped, revealing, wrapped_best.policy, CriticMode::symmetric).value;
  const OptimalPolicy tiger_best = brute_force_optimal(t.pomdp, t.asp);
  const double inf_asym = eps_inf(t.pomdp, t.asp, tiger_best.policy, CriticMode::asymmetric).value;
  const double inf_asym_wrapped = eps_inf(wrapped, revealing, wrapped_best.policy, CriticMode::asymmetric).value;
  const double inf_sym_tiger = eps_inf(t.pomdp, t.asp, tiger_best.policy, CriticMode::symmetric).value;
  o.check(largest == 0.0 && inf_sym == 0.0 && inf_asym == 0.0 && inf_asym_wrapped == 0.0);
  o.detail << "state-revealing: max eps_alias " << fmt(largest) << ", eps_inf,sym " << fmt(inf_sym)
           << "; asymmetric eps_inf " << fmt(inf_asym) << " (symmetric on Tiger: " << fmt(inf_sym_tiger) << ")";
}

// 9 ------------------------------------------------------------------------

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism(Outcome& o, const AcceptanceOptions& options) {
  namespace fs = std::filesystem;
  const fs::path root =
      options.scratch.empty() ? fs::temp_directory_path() / ("aliased-ac-determinism-" + std::to_string(options.seed))
                              : options.scratch / "determinism";
  std::vector<ExperimentConfig> configs;
  auto add = [&](Command command, auto&& tweak) {
    ExperimentConfig c;
    c.command = command;
    c.master_seed = options.seed + 9;
    c.plot = false;
    tweak(c);
    configs.push_back(c);
  };
  add(Command::exact, [](ExperimentConfig&) {});
  add(Command::td, [](ExperimentConfig& c) {
    c.mode = CriticMode::symmetric;
    c.K = 2000;
    c.seeds = {0, 1};
    c.eval_every = 500;
    c.write_traces = true;
  });
  add(Command::nac, [](ExperimentConfig& c) {
    c.T = 3;
    c.N = 100;
    c.K = 500;
    c.seeds = {0, 1};
  });
  add(Command::bounds, [](ExperimentConfig& c) {
    c.mode = CriticMode::symmetric;
    c.K = 1000;
    c.seeds = {0, 1};
  });
  add(Command::sweep, [](ExperimentConfig& c) {
    c.grid_K = {100, 1000};
    c.seeds = {0, 1};
    c.jobs = 2;
  });
  add(Command::accept, [](ExperimentConfig& c) { c.criteria = {1}; });

  std::ostringstream sink;
  int identical = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string bytes[2];
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      ExperimentConfig c = configs[i];
      c.out = root / (std::string(to_string(c.command)) + "-" + std::to_string(rep));
      ran = ran && run(c, sink, sink) == kExitOk;
      bytes[rep] = read_bytes(c.out / "results.csv");
    }
    const bool same = ran && !bytes[0].empty() && bytes[0] == bytes[1];
    o.check(same);
    identical += same ? 1 : 0;
    if (!same) o.detail << to_string(configs[i].command) << " differs; ";
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  o.detail << identical << "/" << configs.size() << " subcommands byte-identical";
}

struct Criterion {
  int id;
  const char* title;
  double budget;
  void (*body)(Outcome&, const AcceptanceOptions&);
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "Tiger golden values", 1.0, tiger_values},
      {2, "symmetric Bellman contraction", 5.0, contraction},
      {3, "natural policy gradient identity", 30.0, npg_identity},
      {4, "asymmetric TD bound", 300.0, asymmetric_td},
      {5, "symmetric TD bound and aliasing floor", 300.0, symmetric_td},
      {6, "aliasing lemma", 60.0, aliasing_lemma},
      {7, "natural actor-critic on Tiger", 1200.0, actor_critic},
      {8, "vanishing inference and aliasing terms", 10.0, vanishing_terms},
      {9, "determinism of results.csv", 60.0, determinism},
  };
  return list;
}

}  // namespace

std::vector<int> criterion_ids() {
  std::vector<int> ids;
  for (const auto& c : criteria()) ids.push_back(c.id);
  return ids;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  const auto& list = criteria();
  const auto it = std::find_if(list.begin(), list.end(), [&](const Criterion& c) { return c.id == id; });
  CriterionResult result;
  result.id = id;
  if (it == list.end()) {
    result.title = "unknown";
    result.detail = "no such criterion";
    return result;
  }
  result.title = it->title;
  result.budget_seconds = it->budget;
  Outcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    it->body(outcome, options);
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.detail << "exception: " << e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.checks_passed = outcome.ok;
  result.detail = outcome.detail.str();
  return result;
}

std::string format_line(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof(head), "%s  %d  %s (%.2f s / %.0f s): ", r.passed() ? "PASS" : "FAIL", r.id,
                r.title.c_str(), r.seconds, r.budget_seconds);
  std::string line = head + r.detail;
  if (r.checks_passed && !r.passed()) line += " [over time budget]";
  return line;
}

}  // namespace aliased_ac
