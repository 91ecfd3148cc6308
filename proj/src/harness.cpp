#include "aliased_ac/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "aliased_ac/acceptance.hpp"
#include "aliased_ac/bounds.hpp"
#include "aliased_ac/csv.hpp"
#include "aliased_ac/error.hpp"
#include "aliased_ac/features.hpp"
#include "aliased_ac/parallel.hpp"
#include "aliased_ac/rng.hpp"

namespace aliased_ac {

namespace fs = std::filesystem;

const char* to_string(Command command) {
  switch (command) {
    case Command::exact: return "exact";
    case Command::td: return "td";
    case Command::nac: return "nac";
    case Command::bounds: return "bounds";
    case Command::sweep: return "sweep";
    case Command::accept: return "accept";
  }
  return "?";
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json vector_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i])) {
      out.push_back(nullptr);
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

Vector json_vector(const nlohmann::json& node) {
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        node[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : node[i].get<double>();
  }
  return v;
}

ExactTables compute_tables(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m) {
  const VisitationMeasure d = discounted_visitation(build_joint_chain(pomdp, asp, policy), pomdp.gamma());
  QTable q_asym = asymmetric_q_exact(pomdp, asp, policy);
  QTable q_sym = symmetric_q_true(q_asym, d);
  QTable q_tilde = symmetric_fixed_point(pomdp, asp, policy, m, d);
  const double J = exact_return(pomdp, asp, policy);
  return {d, std::move(q_asym), std::move(q_sym), std::move(q_tilde), J};
}

std::string label_of(const std::vector<std::string>& labels, int i, const char* prefix) {
  if (static_cast<std::size_t>(i) < labels.size()) return labels[static_cast<std::size_t>(i)];
  return prefix + std::to_string(i);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

std::string report_header(const ExperimentConfig& config) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::ostringstream out;
  out << "# generated " << stamp << " (timestamp line is not compared)\n";
  out << "# command " << to_string(config.command) << ", pomdp " << config.pomdp << ", agent state "
      << config.agent_state << "\n";
  return out.str();
}

std::string clean_message(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

TdConfig td_config(const ExperimentConfig& c, std::int64_t K, int m) {
  TdConfig td;
  td.m = m;
  td.K = K;
  td.alpha = c.alpha;
  td.radius = c.radius;
  td.mode = c.mode;
  td.eval_every = c.eval_every;
  return td;
}

NacConfig nac_config(const ExperimentConfig& c, std::int64_t K, int m, int T, int N) {
  NacConfig nac;
  nac.T = T;
  nac.N = N;
  nac.eta = c.eta;
  nac.zeta = c.zeta;
  nac.radius = c.radius;
  nac.td = td_config(c, K, m);
  nac.mode = c.mode;
  return nac;
}

AliasOptions alias_options(const ExperimentConfig& c) {
  AliasOptions a;
  a.horizon = c.horizon;
  a.conditioning = c.conditioning;
  a.monte_carlo_fallback = c.monte_carlo;
  a.monte_carlo_episodes = c.monte_carlo_episodes;
  a.seed = c.master_seed;
  return a;
}

const QTable& target_table(const ExactTables& t, CriticMode mode) {
  return mode == CriticMode::asymmetric ? t.q_asym : t.q_sym;
}

struct Environment {
  Pomdp pomdp;
  AgentStateProcess asp;
  TabularPolicy policy;
};

Environment environment(const ExperimentConfig& config) {
  auto [pomdp, asp] = resolve_environment(config);
  TabularPolicy policy = resolve_policy(config.policy, pomdp, asp);
  return {std::move(pomdp), std::move(asp), std::move(policy)};
}

std::optional<OptimalPolicy> try_optimal(const Pomdp& pomdp, const AgentStateProcess& asp) {
  try {
    return brute_force_optimal(pomdp, asp);
  } catch (const CapExceededError&) {
    return std::nullopt;
  }
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------- exact

int run_exact(const ExperimentConfig& config, std::ostream& out) {
  const Environment env = environment(config);
  const ExactTables t = exact_tables(env.pomdp, env.asp, env.policy, config.m);
  const int S = env.pomdp.n_states();
  const int Z = env.asp.n_agent_states();
  const int A = env.pomdp.n_actions();
  const double gap = weighted_distance(t.q_sym, t.q_tilde, t.d, env.policy);
  const auto best = try_optimal(env.pomdp, env.asp);

  std::ostringstream csv_text;
  CsvWriter csv(csv_text);
  csv.header({"quantity", "s", "z", "a", "value"});
  for (int s = 0; s < S; ++s) {
    for (int z = 0; z < Z; ++z) {
      csv.cell("visitation").cell(s).cell(z).empty().cell(t.d(s, z));
      csv.end_row();
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int z = 0; z < Z; ++z) {
      for (int a = 0; a < A; ++a) {
        csv.cell("q_asym").cell(s).cell(z).cell(a).cell(t.q_asym.at(s, z, a));
        csv.end_row();
      }
    }
  }
  for (const auto* q : {&t.q_sym, &t.q_tilde}) {
    const char* name = q == &t.q_sym ? "q_sym" : "q_tilde";
    for (int z = 0; z < Z; ++z) {
      for (int a = 0; a < A; ++a) {
        csv.cell(name).empty().cell(z).cell(a).cell(q->values()[q->index(z, a)]);
        csv.end_row();
      }
    }
  }
  auto value_or_nan = [&](const QTable& q, int z) {
    return q.defined(z) ? q.state_value(z, env.policy) : std::numeric_limits<double>::quiet_NaN();
  };
  for (int z = 0; z < Z; ++z) {
    csv.cell("v_sym").empty().cell(z).empty().cell(value_or_nan(t.q_sym, z));
    csv.end_row();
    csv.cell("v_tilde").empty().cell(z).empty().cell(value_or_nan(t.q_tilde, z));
    csv.end_row();
  }
  csv.cell("J").empty().empty().empty().cell(t.J);
  csv.end_row();
  csv.cell("aliasing_gap").empty().empty().empty().cell(gap);
  csv.end_row();
  if (best) {
    csv.cell("J_star").empty().empty().empty().cell(best->value);
    csv.end_row();
    for (int z = 0; z < Z; ++z) {
      csv.cell("optimal_action").empty().cell(z).empty().cell(best->actions[static_cast<std::size_t>(z)]);
      csv.end_row();
    }
  }
  write_text(config.out / "results.csv", csv_text.str());

  std::ostringstream table;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %14s %14s\n", "agent_state", "V", ("V_tilde(m=" + std::to_string(config.m) + ")").c_str());
  table << line;
  for (int z = 0; z < Z; ++z) {
    std::snprintf(line, sizeof(line), "%-16s %14.10g %14.10g\n", label_of(env.asp.labels(), z, "z").c_str(),
                  value_or_nan(t.q_sym, z), value_or_nan(t.q_tilde, z));
    table << line;
  }
  table << "J = " << format_number(t.J) << "\n";
  table << "||Q - Q_tilde||_d = " << format_number(gap) << "\n";
  if (best) {
    table << "J* = " << format_number(best->value) << " with actions";
    for (int z = 0; z < Z; ++z) {
      table << " " << label_of(env.asp.labels(), z, "z") << "="
            << label_of(env.pomdp.labels().actions, best->actions[static_cast<std::size_t>(z)], "a");
    }
    table << "\n";
  }
  out << table.str();
  write_text(config.out / "report.txt", report_header(config) + table.str());
  if (config.plot) {
    write_text(config.out / "plot.gp",
               "set datafile separator ','\n"
               "set title 'agent-state values'\n"
               "set xlabel 'z'\n"
               "plot 'results.csv' using ($1 eq 'v_sym' ? $3 : 1/0):5 with linespoints title 'V', \\\n"
               "     'results.csv' using ($1 eq 'v_tilde' ? $3 : 1/0):5 with linespoints title 'V_tilde'\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- td

struct TdRun {
  double error = 0.0;
  double error_fixed_point = std::numeric_limits<double>::quiet_NaN();
  double beta_norm = 0.0;
  TdTrace trace;
};

TdRun td_one(const Environment& env, const ExactTables& t, const FeatureMap& features, const TdConfig& td,
             bool keep_trace) {
  const QTable& target = target_table(t, td.mode);
  const CriticOracle oracle = make_oracle(target, t.d, env.policy);
  Rng rng(td.seed);
  TdResult r = td_learn(env.pomdp, env.asp, env.policy, features, td, rng, &oracle);
  TdRun run;
  run.error = *r.trace.final_error;
  if (td.mode == CriticMode::symmetric) run.error_fixed_point = measured_critic_error(r.critic, t.q_tilde, t.d, env.policy);
  run.beta_norm = r.critic.beta.norm();
  if (keep_trace) run.trace = std::move(r.trace);
  return run;
}

int run_td(const ExperimentConfig& config, std::ostream& out) {
  const Environment env = environment(config);
  const ExactTables t = exact_tables(env.pomdp, env.asp, env.policy, config.m);
  const FeatureMap features = resolve_features(
      config.features, feature_rows(config.mode, env.pomdp.n_states(), env.asp.n_agent_states(), env.pomdp.n_actions()),
      config.master_seed);
  const TdConfig base = td_config(config, config.K, config.m);

  std::vector<TdRun> runs(config.seeds.size());
  parallel_for(runs.size(), config.jobs, [&](std::size_t i) {
    TdConfig td = base;
    td.seed = derive_seed(config.master_seed, 0, config.seeds[i]);
    runs[i] = td_one(env, t, features, td, config.write_traces);
  });

  std::ostringstream csv_text;
  CsvWriter csv(csv_text);
  csv.header({"seed_index", "seed", "mode", "K", "m", "B", "alpha", "error", "error_fixed_point", "beta_bar_norm"});
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    csv.cell(static_cast<long long>(config.seeds[i]))
        .cell(std::to_string(derive_seed(config.master_seed, 0, config.seeds[i])))
        .cell(std::string_view(to_string(config.mode)))
        .cell(static_cast<long long>(config.K))
        .cell(config.m)
        .cell(config.radius)
        .cell(base.step_size())
        .cell(runs[i].error);
    if (config.mode == CriticMode::symmetric) {
      csv.cell(runs[i].error_fixed_point);
    } else {
      csv.empty();
    }
    csv.cell(runs[i].beta_norm);
    csv.end_row();
    sum_sq += runs[i].error * runs[i].error;
    if (config.write_traces) {
      std::ostringstream trace;
      write_csv(trace, runs[i].trace);
      write_text(config.out / ("trace_" + std::to_string(config.seeds[i]) + ".csv"), trace.str());
    }
  }
  write_text(config.out / "results.csv", csv_text.str());

  std::ostringstream report;
  report << to_string(config.mode) << " TD, K=" << config.K << " m=" << config.m << " B=" << format_number(config.radius)
         << " alpha=" << format_number(base.step_size()) << " seeds=" << runs.size() << "\n";
  report << "sqrt(mean ||target - Q_bar||_d^2) = " << format_number(std::sqrt(sum_sq / runs.size())) << "\n";
  if (config.mode == CriticMode::symmetric) {
    report << "||Q - Q_tilde||_d = " << format_number(weighted_distance(t.q_sym, t.q_tilde, t.d, env.policy)) << "\n";
  }
  out << report.str();
  write_text(config.out / "report.txt", report_header(config) + report.str());
  if (config.plot) {
    std::string script =
        "set datafile separator ','\n"
        "set xlabel 'seed index'\n"
        "set ylabel 'critic error'\n"
        "plot 'results.csv' every ::1 using 1:8 with points title 'error'";
    if (config.mode == CriticMode::symmetric) script += ", \\\n     'results.csv' every ::1 using 1:9 with points title 'error vs fixed point'";
    write_text(config.out / "plot.gp", script + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- nac

int run_nac(const ExperimentConfig& config, std::ostream& out) {
  const auto [pomdp, asp] = resolve_environment(config);
  const FeatureMap critic_features = resolve_features(
      config.features, feature_rows(config.mode, pomdp.n_states(), asp.n_agent_states(), pomdp.n_actions()),
      config.master_seed);
  const FeatureMap psi =
      resolve_features(config.policy_features, asp.n_agent_states() * pomdp.n_actions(), config.master_seed);
  const NacConfig base = nac_config(config, config.K, config.m, config.T, config.N);
  const auto best = try_optimal(pomdp, asp);

  std::vector<NacTrace> traces(config.seeds.size());
  parallel_for(traces.size(), config.jobs, [&](std::size_t i) {
    NacConfig nac = base;
    nac.seed = derive_seed(config.master_seed, 0, config.seeds[i]);
    Rng rng(nac.seed);
    traces[i] = nac_run(pomdp, asp, critic_features, psi, nac, rng).trace;
  });

  std::ostringstream csv_text;
  CsvWriter csv(csv_text);
  csv.header({"seed_index", "t", "J", "critic_error", "w_bar_norm", "theta_norm"});
  std::vector<double> gaps;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    double best_J = -std::numeric_limits<double>::infinity();
    for (const auto& r : traces[i].records) {
      csv.cell(static_cast<long long>(config.seeds[i])).cell(r.t).cell(r.J);
      if (std::isnan(r.critic_error)) {
        csv.empty();
      } else {
        csv.cell(r.critic_error);
      }
      csv.cell(r.w_bar_norm).cell(r.theta_norm);
      csv.end_row();
      best_J = std::max(best_J, r.J);
    }
    if (best) gaps.push_back(best->value - best_J);
  }
  write_text(config.out / "results.csv", csv_text.str());

  std::ostringstream report;
  report << to_string(config.mode) << " natural actor-critic, T=" << config.T << " N=" << config.N << " K=" << config.K
         << " m=" << config.m << " B=" << format_number(config.radius) << " seeds=" << traces.size() << "\n";
  if (best) {
    report << "J* = " << format_number(best->value) << "\n";
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      report << "seed " << config.seeds[i] << ": min_t J* - J(pi_t) = " << format_number(gaps[i]) << "\n";
    }
    report << "median = " << format_number(median(gaps)) << " (" << format_number(median(gaps) / best->value)
           << " of J*)\n";
  }
  out << report.str();
  write_text(config.out / "report.txt", report_header(config) + report.str());
  if (config.plot) {
    write_text(config.out / "plot.gp",
               "set datafile separator ','\n"
               "set xlabel 't'\n"
               "set ylabel 'J(pi_t)'\n"
               "plot 'results.csv' every ::1 using 2:3 with points title 'J'\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bounds

int run_bounds(const ExperimentConfig& config, std::ostream& out) {
  const Environment env = environment(config);
  const ExactTables t = exact_tables(env.pomdp, env.asp, env.policy, config.m);
  const FeatureMap features = resolve_features(
      config.features, feature_rows(config.mode, env.pomdp.n_states(), env.asp.n_agent_states(), env.pomdp.n_actions()),
      config.master_seed);
  const TdConfig base = td_config(config, config.K, config.m);

  std::vector<double> errors(config.seeds.size());
  parallel_for(errors.size(), config.jobs, [&](std::size_t i) {
    TdConfig td = base;
    td.seed = derive_seed(config.master_seed, 0, config.seeds[i]);
    errors[i] = td_one(env, t, features, td, false).error;
  });
  const AliasOptions alias = alias_options(config);
  const CriticBoundTerms terms = critic_bound_terms(env.pomdp, env.asp, env.policy, features, base, alias);
  const BoundReport report = bound_report_td(errors, terms, base, env.pomdp.gamma(), config.conditioning);

  std::ostringstream csv_text;
  write_csv(csv_text, std::vector<BoundReport>{report});
  write_text(config.out / "results.csv", csv_text.str());

  std::ostringstream text;
  text << to_text(report);
  const AliasingLemmaCheck lemma = aliasing_lemma_check(env.pomdp, env.asp, env.policy, config.m, alias);
  text << "aliasing lemma (m=" << config.m << "): lhs " << format_number(lemma.lhs) << " <= rhs "
       << format_number(lemma.rhs) << " + tail " << format_number(lemma.tail) << ": "
       << (lemma.holds ? "holds" : "violated") << "\n";
  if (const auto best = try_optimal(env.pomdp, env.asp)) {
    const TruncatedValue inf = eps_inf(env.pomdp, env.asp, best->policy, config.mode, alias);
    text << "eps_inf (" << to_string(config.mode) << ", optimal policy) = " << format_number(inf.value) << " (+ tail "
         << format_number(inf.tail) << ")\n";
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    text << "seed " << config.seeds[i] << ": ||target - Q_bar||_d = " << format_number(errors[i]) << "\n";
  }
  out << text.str();
  write_text(config.out / "report.txt", report_header(config) + text.str());
  if (config.plot) {
    write_text(config.out / "plot.gp",
               "set datafile separator ','\n"
               "set style data histograms\n"
               "set style fill solid\n"
               "plot 'results.csv' using 7:xtic(1) title 'eps_td', '' using 8 title 'eps_app', \\\n"
               "     '' using 9 title 'eps_shift', '' using 10 title 'eps_alias', '' using 13 title 'measured'\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct GridPoint {
  std::int64_t K;
  int m;
  int N;
  int T;
};

struct SweepCell {
  double metric = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
};

std::vector<GridPoint> grid_points(const ExperimentConfig& c) {
  const std::vector<std::int64_t> Ks = c.grid_K.empty() ? std::vector<std::int64_t>{c.K} : c.grid_K;
  const std::vector<int> ms = c.grid_m.empty() ? std::vector<int>{c.m} : c.grid_m;
  const std::vector<int> Ns = c.grid_N.empty() ? std::vector<int>{c.N} : c.grid_N;
  const std::vector<int> Ts = c.grid_T.empty() ? std::vector<int>{c.T} : c.grid_T;
  std::vector<GridPoint> points;
  for (auto K : Ks) {
    for (int m : ms) {
      for (int N : Ns) {
        for (int T : Ts) points.push_back({K, m, N, T});
      }
    }
  }
  return points;
}

int run_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const Environment env = environment(config);
  const std::vector<GridPoint> points = grid_points(config);
  const Command algo = config.sweep_algorithm;
  const int S = env.pomdp.n_states();
  const int Z = env.asp.n_agent_states();
  const int A = env.pomdp.n_actions();
  const FeatureMap features =
      resolve_features(config.features, feature_rows(config.mode, S, Z, A), config.master_seed);

  std::map<int, ExactTables> tables;
  std::optional<OptimalPolicy> best;
  std::optional<FeatureMap> psi;
  if (algo == Command::nac) {
    best = brute_force_optimal(env.pomdp, env.asp);
    psi = resolve_features(config.policy_features, Z * A, config.master_seed);
  } else {
    for (const auto& p : points) {
      if (!tables.count(p.m)) tables.emplace(p.m, exact_tables(env.pomdp, env.asp, env.policy, p.m));
    }
  }

  const std::size_t n_seeds = config.seeds.size();
  std::vector<SweepCell> cells(points.size() * n_seeds);
  parallel_for(cells.size(), config.jobs, [&](std::size_t idx) {
    const std::size_t g = idx / n_seeds;
    const std::size_t i = idx % n_seeds;
    const GridPoint& p = points[g];
    const std::uint64_t seed = derive_seed(config.master_seed, g, config.seeds[i]);
    try {
      if (algo == Command::nac) {
        NacConfig nac = nac_config(config, p.K, p.m, p.T, p.N);
        nac.seed = seed;
        nac.measure_critic = false;
        Rng rng(seed);
        const NacTrace trace = nac_run(env.pomdp, env.asp, features, *psi, nac, rng).trace;
        double best_J = -std::numeric_limits<double>::infinity();
        for (const auto& r : trace.records) best_J = std::max(best_J, r.J);
        cells[idx].metric = best->value - best_J;
      } else {
        TdConfig td = td_config(config, p.K, p.m);
        td.seed = seed;
        cells[idx].metric = td_one(env, tables.at(p.m), features, td, false).error;
      }
    } catch (const std::exception& e) {
      cells[idx].status = "failed: " + clean_message(e.what());
    }
  });

  std::ostringstream csv_text;
  CsvWriter csv(csv_text);
  csv.header({"grid_index", "K", "m", "N", "T", "row", "seed_index", "seed", "metric", "status"});
  std::vector<BoundReport> reports;
  std::size_t failures = 0;
  for (std::size_t g = 0; g < points.size(); ++g) {
    const GridPoint& p = points[g];
    auto point_cells = [&] {
      csv.cell(static_cast<long long>(g)).cell(static_cast<long long>(p.K)).cell(p.m).cell(p.N).cell(p.T);
    };
    std::vector<double> ok;
    for (std::size_t i = 0; i < n_seeds; ++i) {
      const SweepCell& c = cells[g * n_seeds + i];
      point_cells();
      csv.cell("run").cell(static_cast<long long>(config.seeds[i]))
          .cell(std::to_string(derive_seed(config.master_seed, g, config.seeds[i])));
      if (c.status == "ok") {
        csv.cell(c.metric);
        ok.push_back(c.metric);
      } else {
        csv.empty();
        ++failures;
      }
      csv.cell(std::string_view(c.status));
      csv.end_row();
    }
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
    if (!ok.empty()) {
      mean = 0.0;
      for (double v : ok) mean += v;
      mean /= ok.size();
      if (ok.size() > 1) {
        double var = 0.0;
        for (double v : ok) var += (v - mean) * (v - mean);
        stderr_ = std::sqrt(var / (ok.size() - 1) / ok.size());
      }
    }
    const std::string status = ok.size() == n_seeds ? "ok" : "partial";
    point_cells();
    csv.cell("mean").empty().empty().cell(mean).cell(std::string_view(status));
    csv.end_row();
    point_cells();
    csv.cell("stderr").empty().empty().cell(stderr_).cell(std::string_view(status));
    csv.end_row();

    if (algo == Command::bounds && ok.size() >= 2) {
      const TdConfig td = td_config(config, p.K, p.m);
      const CriticBoundTerms terms =
          critic_bound_terms(env.pomdp, env.asp, env.policy, features, td, alias_options(config));
      reports.push_back(bound_report_td(ok, terms, td, env.pomdp.gamma(), config.conditioning));
    }
  }
  write_text(config.out / "results.csv", csv_text.str());
  if (algo == Command::bounds) {
    std::ostringstream bounds_text;
    write_csv(bounds_text, reports);
    write_text(config.out / "bounds.csv", bounds_text.str());
  }

  std::ostringstream report;
  report << "sweep of " << to_string(algo) << " over " << points.size() << " grid points x " << n_seeds
         << " seeds, " << failures << " failed runs\n";
  for (const auto& r : reports) report << to_text(r);
  out << report.str();
  write_text(config.out / "report.txt", report_header(config) + report.str());
  if (config.plot) {
    write_text(config.out / "plot.gp",
               "set datafile separator ','\n"
               "set logscale x\n"
               "set xlabel 'K'\n"
               "set ylabel 'metric'\n"
               "plot 'results.csv' using ($2):(strcol(6) eq 'mean' ? $9 : 1/0) with linespoints title 'mean', \\\n"
               "     'results.csv' using ($2):(strcol(6) eq 'run' ? $9 : 1/0) with points title 'runs'\n");
  }
  if (failures > 0) {
    err << failures << " sweep runs failed; see the status column of results.csv\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- accept

int run_accept(const ExperimentConfig& config, std::ostream& out) {
  std::vector<int> ids = config.criteria.empty() ? criterion_ids() : config.criteria;
  AcceptanceOptions options;
  options.jobs = config.jobs;
  options.seed = config.master_seed;
  options.scratch = config.out / "scratch";

  std::ostringstream csv_text;
  CsvWriter csv(csv_text);
  csv.header({"criterion", "checks_passed", "detail"});
  std::ostringstream report;
  int passed = 0;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, options);
    out << format_line(r) << "\n" << std::flush;
    report << format_line(r) << "\n";
    csv.cell(r.id).cell(r.checks_passed ? 1 : 0).cell(std::string_view(clean_message(r.detail)));
    csv.end_row();
    passed += r.passed() ? 1 : 0;
  }
  report << passed << "/" << ids.size() << " criteria passed\n";
  out << passed << "/" << ids.size() << " criteria passed\n";
  std::error_code ec;
  fs::remove_all(options.scratch, ec);
  write_text(config.out / "results.csv", csv_text.str());
  write_text(config.out / "report.txt", report_header(config) + report.str());
  return kExitOk;
}

}  // namespace

ExactTables exact_tables(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m) {
  const char* dir = std::getenv("ALIASED_AC_CACHE");
  if (dir == nullptr || *dir == '\0') return compute_tables(pomdp, asp, policy, m);

  std::string key = to_json(pomdp) + to_json(asp) + "m=" + std::to_string(m) + "\n";
  for (int z = 0; z < policy.n_agent_states(); ++z) {
    for (int a = 0; a < policy.n_actions(); ++a) key += format_number(policy(z, a)) + ",";
  }
  char name[40];
  std::snprintf(name, sizeof(name), "exact-%016llx.json", static_cast<unsigned long long>(fnv1a(key)));
  const fs::path file = fs::path(dir) / name;
  const int S = pomdp.n_states();
  const int Z = asp.n_agent_states();
  const int A = pomdp.n_actions();

  if (fs::exists(file)) {
    try {
      std::ifstream in(file);
      const nlohmann::json doc = nlohmann::json::parse(in);
      if (doc.at("key").get<std::string>() == key) {
        VisitationMeasure d{json_vector(doc.at("d")), VisitationKind::discounted, S, Z};
        return {std::move(d), QTable(QKind::asymmetric, S, Z, A, json_vector(doc.at("q_asym"))),
                QTable(QKind::symmetric_true, S, Z, A, json_vector(doc.at("q_sym"))),
                QTable(QKind::symmetric_fixed_point, S, Z, A, json_vector(doc.at("q_tilde"))),
                doc.at("J").get<double>()};
      }
    } catch (const std::exception&) {
      // unreadable cache entries are recomputed and overwritten
    }
  }
  ExactTables t = compute_tables(pomdp, asp, policy, m);
  nlohmann::json doc;
  doc["key"] = key;
  doc["d"] = vector_json(t.d.weights);
  doc["q_asym"] = vector_json(t.q_asym.values());
  doc["q_sym"] = vector_json(t.q_sym.values());
  doc["q_tilde"] = vector_json(t.q_tilde.values());
  doc["J"] = t.J;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = file.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream f(tmp);
    f << doc.dump();
  }
  fs::rename(tmp, file, ec);
  return t;
}

std::pair<Pomdp, AgentStateProcess> resolve_environment(const ExperimentConfig& config) {
  Pomdp pomdp = resolve_pomdp(config.pomdp, config.gamma);
  if (config.agent_state == "state_revealing") return make_state_revealing(pomdp);
  AgentStateProcess asp = resolve_agent_state(config.agent_state, pomdp);
  return {std::move(pomdp), std::move(asp)};
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  require(c.gamma < 1.0, "gamma must be < 1");
  require(!c.seeds.empty(), "at least one seed is required");
  require(c.m >= 1, "m must be >= 1");
  require(c.K >= 1, "K must be >= 1");
  require(!c.alpha || *c.alpha >= 0.0, "alpha must be >= 0");
  require(c.radius > 0.0, "B must be > 0");
  require(c.eval_every >= 0, "eval-every must be >= 0");
  require(c.T >= 1 && c.N >= 1, "T and N must be >= 1");
  require(!c.eta || *c.eta >= 0.0, "eta must be >= 0");
  require(!c.zeta || *c.zeta >= 0.0, "zeta must be >= 0");
  require(c.horizon >= 0, "horizon must be >= 0");
  require(c.monte_carlo_episodes >= 1, "monte-carlo episodes must be >= 1");
  require(c.jobs >= 1, "jobs must be >= 1");
  if (c.command == Command::bounds) require(c.seeds.size() >= 2, "bounds needs at least two seeds");
  if (c.command == Command::sweep) {
    require(c.sweep_algorithm == Command::td || c.sweep_algorithm == Command::nac ||
                c.sweep_algorithm == Command::bounds,
            "sweep algorithm must be td, nac or bounds");
    require(!(c.grid_K.empty() && c.grid_m.empty() && c.grid_N.empty() && c.grid_T.empty()), "sweep grid is empty");
    for (auto K : c.grid_K) require(K >= 1, "grid K values must be >= 1");
    for (int m : c.grid_m) require(m >= 1, "grid m values must be >= 1");
    for (int N : c.grid_N) require(N >= 1, "grid N values must be >= 1");
    for (int T : c.grid_T) require(T >= 1, "grid T values must be >= 1");
    const std::size_t points = std::max<std::size_t>(1, c.grid_K.size()) * std::max<std::size_t>(1, c.grid_m.size()) *
                               std::max<std::size_t>(1, c.grid_N.size()) * std::max<std::size_t>(1, c.grid_T.size());
    require(points * c.seeds.size() <= 100000, "sweep grid too large (more than 100000 runs)");
    if (c.sweep_algorithm == Command::bounds) require(c.seeds.size() >= 2, "bounds sweeps need at least two seeds");
  }
  if (c.command == Command::accept) {
    const auto ids = criterion_ids();
    for (int id : c.criteria) {
      require(std::find(ids.begin(), ids.end(), id) != ids.end(), "unknown criterion " + std::to_string(id));
    }
    return;
  }
  for (const auto* path : {&c.pomdp}) {
    require(*path == "tiger" || fs::exists(*path), "POMDP file not found: " + *path);
  }
  // resolving everything up front surfaces parse errors before any run
  const auto [pomdp, asp] = resolve_environment(c);
  const int S = pomdp.n_states();
  const int Z = asp.n_agent_states();
  const int A = pomdp.n_actions();
  if (c.command != Command::nac && !(c.command == Command::sweep && c.sweep_algorithm == Command::nac)) {
    resolve_policy(c.policy, pomdp, asp);
  }
  resolve_features(c.features, feature_rows(c.mode, S, Z, A), c.master_seed);
  resolve_features(c.policy_features, Z * A, c.master_seed);
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
  } catch (const std::invalid_argument& e) {
    err << "error: invalid value: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    err << "error: value out of range: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    fs::create_directories(config.out);
    switch (config.command) {
      case Command::exact: return run_exact(config, out);
      case Command::td: return run_td(config, out);
      case Command::nac: return run_nac(config, out);
      case Command::bounds: return run_bounds(config, out);
      case Command::sweep: return run_sweep(config, out, err);
      case Command::accept: return run_accept(config, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asymmetric and symmetric critics and natural actor-critic on tabular POMDPs", "aliased-ac"};
  app.set_config("--config", "", "TOML-style configuration file; command-line flags take precedence");
  app.require_subcommand(1, 1);

  ExperimentConfig c;
  std::string mode = "asym";
  std::string conditioning = "initial";
  std::string algorithm = "td";
  std::optional<double> gamma;
  int n_seeds = 0;

  app.add_option("--pomdp", c.pomdp, "builtin name (tiger) or JSON file")->capture_default_str();
  app.add_option("--gamma", gamma, "discount factor override");
  app.add_option("--agent-state", c.agent_state, "last_obs, window:<k>, state_revealing or JSON file")
      ->capture_default_str();
  app.add_option("--policy", c.policy, "uniform, <action>_always, always:<a> or JSON file")->capture_default_str();
  app.add_option("--features", c.features, "critic features: tabular, random:<dim>[:<seed>] or CSV file")
      ->capture_default_str();
  app.add_option("--policy-features", c.policy_features, "actor features, same forms as --features")
      ->capture_default_str();
  app.add_option("--mode", mode, "asym or sym")->check(CLI::IsMember({"asym", "sym"}))->capture_default_str();
  app.add_option("-m,--bootstrap", c.m, "bootstrap step m")->capture_default_str();
  app.add_option("-K,--K", c.K, "TD updates")->capture_default_str();
  app.add_option("--alpha", c.alpha, "TD step size (default 1/sqrt(K))");
  app.add_option("-B,--B", c.radius, "projection radius")->capture_default_str();
  app.add_option("--eval-every", c.eval_every, "measure the running critic error every E updates (0: off)")
      ->capture_default_str();
  app.add_flag("--trace", c.write_traces, "write per-seed TD traces");
  app.add_option("-T,--T", c.T, "actor updates")->capture_default_str();
  app.add_option("-N,--N", c.N, "inner SGD steps")->capture_default_str();
  app.add_option("--eta", c.eta, "actor step (default 1/sqrt(T))");
  app.add_option("--zeta", c.zeta, "inner step (default B sqrt(1-gamma)/sqrt(2N))");
  app.add_option("--horizon", c.horizon, "truncation of the belief-gap sums")->capture_default_str();
  app.add_option("--conditioning", conditioning, "initial or visitation")
      ->check(CLI::IsMember({"initial", "visitation"}))
      ->capture_default_str();
  app.add_flag("--monte-carlo", c.monte_carlo, "fall back to Monte Carlo when history enumeration is too large");
  app.add_option("--mc-episodes", c.monte_carlo_episodes, "Monte Carlo episodes")->capture_default_str();
  app.add_option("--seed", c.master_seed, "master seed")->capture_default_str();
  app.add_option("--seeds", c.seeds, "seed indices")->delimiter(',');
  app.add_option("--n-seeds", n_seeds, "shorthand for seed indices 0..n-1");
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--jobs", c.jobs, "worker threads")->capture_default_str();
  app.add_flag("!--no-plot", c.plot, "skip plot.gp");
  app.add_option("--algorithm", algorithm, "sweep algorithm: td, nac or bounds")
      ->check(CLI::IsMember({"td", "nac", "bounds"}))
      ->capture_default_str();
  app.add_option("--grid-K", c.grid_K, "sweep values of K")->delimiter(',');
  app.add_option("--grid-m", c.grid_m, "sweep values of m")->delimiter(',');
  app.add_option("--grid-N", c.grid_N, "sweep values of N")->delimiter(',');
  app.add_option("--grid-T", c.grid_T, "sweep values of T")->delimiter(',');
  app.add_option("--criteria", c.criteria, "acceptance criteria to run (default all)")->delimiter(',');

  const std::vector<std::pair<Command, const char*>> commands = {
      {Command::exact, "exact value tables of a fixed policy"},
      {Command::td, "m-step TD learning over seeds"},
      {Command::nac, "natural actor-critic over seeds"},
      {Command::bounds, "critic bound report with measured errors"},
      {Command::sweep, "grid of td, nac or bounds runs"},
      {Command::accept, "acceptance suite"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(cmd), help);
    sub->fallthrough();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) c.command = commands[i].first;
  }
  c.mode = parse_mode(mode);
  c.conditioning = conditioning == "initial" ? GapConditioning::initial_distribution : GapConditioning::visitation;
  c.sweep_algorithm = algorithm == "td" ? Command::td : algorithm == "nac" ? Command::nac : Command::bounds;
  if (gamma) c.gamma = *gamma;
  if (n_seeds < 0) {
    err << "error: --n-seeds must be >= 0\n";
    return kExitValidation;
  }
  if (n_seeds > 0) {
    c.seeds.clear();
    for (int i = 0; i < n_seeds; ++i) c.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (gamma && !(*gamma >= 0.0)) {
    err << "error: gamma must be >= 0\n";
    return kExitValidation;
  }
  return run(c, out, err);
}

}  // namespace aliased_ac
