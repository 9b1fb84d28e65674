#pragma once

#include <gne/async_engine.hpp>
#include <gne/cournot.hpp>
#include <gne/game.hpp>
#include <gne/oracle.hpp>
#include <gne/splitting.hpp>
#include <gne/sync_solver.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gne::cli {

enum ExitCode : int { kOk = 0, kInvalid = 2, kNonConvergence = 3 };

struct GenerateConfig {
  Index n = 8;
  Index m = 3;
  std::uint64_t seed = 42;
  bool equality = false;
  std::optional<double> avg_degree;  ///< random connected graph instead of the competition graph
  std::vector<Index> dim_choices;    ///< each n_i drawn from this set; empty means n_i = m
  std::string out;                   ///< empty: stdout
};

struct SolveConfig {
  std::string game_path;  ///< empty: generate inline from `inline_game` with `seed`
  GenerateConfig inline_game;
  std::string algorithm = "sd-geno";  ///< sd-geno | ad-geed | ad-geno
  std::string scenario = "A";         ///< A | B | C | custom
  std::vector<double> probabilities;  ///< custom: activation probabilities (empty = uniform)
  bool round_robin = false;           ///< custom: cyclic activation
  std::string delay_mode = "zero";    ///< custom: zero | fixed | uniform
  int max_delay = 0;                  ///< custom: delay bound
  double rho = 1.0;
  std::optional<double> theta;
  std::optional<double> eta;
  double safety = 0.99;
  double c = 0.9;
  double tol = 1e-6;
  Index max_iter = 2000000;  ///< iterations (sync) or epochs of N activations (async)
  std::uint64_t seed = 42;
  std::string reference = "oracle";  ///< oracle | none | path to a JSON file with "x"
  Index record_every = 1;
  bool unsafe = false;
  std::string trace_out;
  std::string summary_out;
  std::string plot_out;
  std::string schedule_out;
  std::string replay_path;
};

struct CompareConfig {
  std::vector<std::string> algorithms{"ad-geed", "ad-geno"};
  Index n = 40;
  std::vector<double> degrees{3, 10, 20, 39};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool equality = true;
  std::string scenario = "A";
  double rho = 1.0;
  double safety = 0.99;
  double c = 0.9;
  double tol = 1e-6;
  Index max_iter = 2000000;  ///< epoch cap when running to convergence
  Index max_epochs = 0;      ///< > 0: fixed common epoch budget instead of running to tol
  int repeats = 3;           ///< timing is the minimum over repeats
  int jobs = 1;
  std::string out;         ///< empty: stdout
  std::string detail_out;  ///< optional per-(degree, seed) rows
};

struct OracleConfig {
  std::string game_path;
  GenerateConfig inline_game;
  double tol = 1e-9;
  Index max_iter = 2000000;
  std::string out;  ///< empty: stdout
};

/// One (degree, seed) pair of a density sweep.
struct SweepRun {
  double degree = 0;
  std::uint64_t seed = 0;
  std::int64_t time_geed_ns = 0;
  std::int64_t time_geno_ns = 0;
  Index epochs_geed = 0;
  Index epochs_geno = 0;
  bool converged_geed = false;
  bool converged_geno = false;
};

struct SweepRow {
  double avg_degree = 0;
  double time_geed_ms = 0;  ///< summed over seeds
  double time_geno_ms = 0;
  double epochs_geed = 0;  ///< mean over seeds
  double epochs_geno = 0;
  double speedup_percent = 0;  ///< 100 (time_geed - time_geno) / time_geed
};

struct SolveOutcome {
  nlohmann::json summary;
  MetricsTrace<double> trace;
  std::vector<ScheduleEntry> schedule;
  bool converged = false;
};

GameInstance<double> generate_game(const GenerateConfig& cfg);
StepConfig<double> derive_solve_steps(const GameInstance<double>& game, const SolveConfig& cfg, const ActivationModel& activation,
                                      const DelayModel& delays);
std::pair<ActivationModel, DelayModel> solve_schedule(const SolveConfig& cfg, Index num_agents);

SolveOutcome run_solve(const SolveConfig& cfg);
std::vector<SweepRun> run_sweep(const CompareConfig& cfg);
std::vector<SweepRow> aggregate_sweep(const std::vector<SweepRun>& runs);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_detail_csv(const std::vector<SweepRun>& runs);

int cmd_generate(const GenerateConfig& cfg);
int cmd_solve(const SolveConfig& cfg);
int cmd_compare(const CompareConfig& cfg);
int cmd_oracle(const OracleConfig& cfg);

/// Full command-line entry point: generate | solve | compare | oracle | replay.
int run_cli(int argc, const char* const* argv);

}  // namespace gne::cli
