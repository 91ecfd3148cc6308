#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aliased_ac/agent_state.hpp"
#include "aliased_ac/history.hpp"
#include "aliased_ac/npg.hpp"
#include "aliased_ac/oracles.hpp"
#include "aliased_ac/pomdp.hpp"
#include "aliased_ac/tabular_policy.hpp"
#include "aliased_ac/td.hpp"

namespace aliased_ac {

enum class Command { exact, td, nac, bounds, sweep, accept };

const char* to_string(Command command);

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct ExperimentConfig {
  Command command = Command::exact;
  std::string pomdp = "tiger";
  double gamma = -1.0;  // < 0: builtin default or the file's value
  std::string agent_state = "last_obs";
  std::string policy = "enter_always";
  std::string features = "tabular";         // critic features
  std::string policy_features = "tabular";  // psi
  CriticMode mode = CriticMode::asymmetric;

  int m = 1;
  std::int64_t K = 10000;
  std::optional<double> alpha;
  double radius = 15.0;
  std::int64_t eval_every = 0;
  bool write_traces = false;

  int T = 50;
  int N = 2000;
  std::optional<double> eta;
  std::optional<double> zeta;

  int horizon = 40;
  GapConditioning conditioning = GapConditioning::initial_distribution;
  bool monte_carlo = false;
  int monte_carlo_episodes = 100000;

  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds{0};  // seed indices
  std::filesystem::path out = "out";
  int jobs = 1;
  bool plot = true;

  // sweep
  Command sweep_algorithm = Command::td;
  std::vector<std::int64_t> grid_K;
  std::vector<int> grid_m;
  std::vector<int> grid_N;
  std::vector<int> grid_T;

  // accept
  std::vector<int> criteria;  // empty: all
};

/// Checks every field and referenced file; throws ValidationError.
void validate(const ExperimentConfig& config);

/// Runs one subcommand, writing results.csv, report.txt and plot.gp under
/// config.out. Returns an exit code; diagnostics go to err.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Command-line entry point (CLI11): subcommands exact, td, nac, bounds,
/// sweep, accept.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Exact tables of one (POMDP, agent state, policy, m). When the
/// ALIASED_AC_CACHE environment variable names a directory, tables are
/// stored there keyed by a hash of the inputs and reused.
struct ExactTables {
  VisitationMeasure d;
  QTable q_asym;
  QTable q_sym;
  QTable q_tilde;
  double J = 0.0;
};

ExactTables exact_tables(const Pomdp& pomdp, const AgentStateProcess& asp, const TabularPolicy& policy, int m);

/// POMDP and agent state named by the config; "state_revealing" swaps in the
/// state-revealing wrapper of the POMDP.
std::pair<Pomdp, AgentStateProcess> resolve_environment(const ExperimentConfig& config);

}  // namespace aliased_ac
