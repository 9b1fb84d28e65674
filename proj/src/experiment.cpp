#include "experiment.hpp"

#include "io.hpp"
#include "plot.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace gne::cli {

using io::Json;

GameInstance<double> generate_game(const GenerateConfig& cfg) {
  if (cfg.n < 1) throw InvalidParameter("--n must be at least 1");
  if (cfg.m < 1) throw InvalidParameter("--m must be at least 1");
  CournotSpec spec;
  spec.num_firms = cfg.n;
  spec.num_markets = cfg.m;
  spec.seed = cfg.seed;
  spec.equality = cfg.equality;
  spec.dim_choices = cfg.dim_choices;
  if (cfg.avg_degree) spec.graph = random_connected_graph(cfg.n, *cfg.avg_degree, derive_seed(cfg.seed, 0x6EA9));
  return generate_instance<double>(spec).game;
}

std::pair<ActivationModel, DelayModel> solve_schedule(const SolveConfig& cfg, Index num_agents) {
  if (cfg.scenario == "A") return scenario_config(Scenario::A, num_agents, cfg.seed);
  if (cfg.scenario == "B") return scenario_config(Scenario::B, num_agents, cfg.seed);
  if (cfg.scenario == "C") return scenario_config(Scenario::C, num_agents, cfg.seed);
  if (cfg.scenario != "custom") throw InvalidParameter("unknown scenario '" + cfg.scenario + "' (A, B, C or custom)");
  const std::uint64_t act_seed = derive_seed(cfg.seed, 0xAC71);
  const std::uint64_t delay_seed = derive_seed(cfg.seed, 0xDE1A);
  ActivationModel activation = cfg.round_robin            ? ActivationModel::round_robin(num_agents)
                               : cfg.probabilities.empty() ? ActivationModel::uniform(num_agents, act_seed)
                                                           : ActivationModel::iid(cfg.probabilities, act_seed);
  if (activation.num_agents() != num_agents) throw InvalidParameter("activation probabilities: one per agent required");
  DelayModel delays;
  if (cfg.delay_mode == "zero") {
    delays = DelayModel::zero();
  } else if (cfg.delay_mode == "fixed") {
    delays = DelayModel::fixed(cfg.max_delay);
  } else if (cfg.delay_mode == "uniform") {
    delays = DelayModel::uniform(cfg.max_delay, delay_seed);
  } else {
    throw InvalidParameter("unknown delay mode '" + cfg.delay_mode + "' (zero, fixed or uniform)");
  }
  return {std::move(activation), delays};
}

namespace {

bool is_async(const std::string& algorithm) {
  if (algorithm == "sd-geno") return false;
  if (algorithm == "ad-geed" || algorithm == "ad-geno") return true;
  throw InvalidParameter("unknown algorithm '" + algorithm + "' (sd-geno, ad-geed or ad-geno)");
}

AsyncAlgorithm async_kind(const std::string& algorithm) { return algorithm == "ad-geed" ? AsyncAlgorithm::geed : AsyncAlgorithm::geno; }

Json vec_json(const Vector<double>& v) {
  Json a = Json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

GameInstance<double> load_or_generate(const std::string& path, const GenerateConfig& inline_game) {
  return path.empty() ? generate_game(inline_game) : io::load_game(path);
}

std::optional<Vector<double>> resolve_reference(const SolveConfig& cfg, const GameInstance<double>& game) {
  if (cfg.reference == "none") return std::nullopt;
  if (cfg.reference == "oracle") return vgne_oracle(game).x;
  Json j;
  try {
    j = Json::parse(io::read_file(cfg.reference));
  } catch (const Json::parse_error& e) {
    throw InvalidParameter(cfg.reference + ": " + e.what());
  }
  if (!j.contains("x") || !j["x"].is_array()) throw InvalidParameter(cfg.reference + ": missing \"x\" array");
  Vector<double> x(static_cast<Index>(j["x"].size()));
  for (std::size_t k = 0; k < j["x"].size(); ++k) x(static_cast<Index>(k)) = j["x"][k].get<double>();
  if (x.size() != game.total_dim()) throw DimensionMismatch(cfg.reference + ": reference length differs from the game dimension");
  return x;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    io::write_file(path, content);
  }
}

}  // namespace

StepConfig<double> derive_solve_steps(const GameInstance<double>& game, const SolveConfig& cfg, const ActivationModel& activation,
                                      const DelayModel& delays) {
  StepConfig<double> steps = derive_steps<double>(game, cfg.rho, cfg.theta, cfg.safety);
  if (cfg.eta) {
    steps.eta = *cfg.eta;
  } else if (is_async(cfg.algorithm)) {
    steps.eta = eta_bound_async(steps.chi, steps.theta, game.num_agents(), activation.p_min(), delays.max_delay(), cfg.c);
  } else {
    steps.eta = eta_default_sync(steps.chi, steps.theta);
  }
  return steps;
}

SolveOutcome run_solve(const SolveConfig& cfg) {
  const bool async = is_async(cfg.algorithm);
  if (cfg.tol <= 0) throw InvalidParameter("--tol must be positive");
  if (cfg.max_iter < 1) throw InvalidParameter("--max-iter must be positive");
  if (cfg.record_every < 1) throw InvalidParameter("--record-every must be positive");
  if (!cfg.replay_path.empty() && !async) throw InvalidParameter("a schedule replay needs an asynchronous algorithm");
  GenerateConfig gen = cfg.inline_game;
  gen.seed = cfg.seed;
  const GameInstance<double> game = load_or_generate(cfg.game_path, gen);
  const Index N = game.num_agents();
  const auto [activation, delays] = solve_schedule(cfg, N);
  const StepConfig<double> steps = derive_solve_steps(game, cfg, activation, delays);

  std::vector<std::string> violations = step_violations(steps, game);
  double bound = 0;
  if (async) {
    bound = eta_bound_async(steps.chi, steps.theta, N, activation.p_min(), delays.max_delay(), cfg.c);
    if (!(steps.eta > 0 && steps.eta <= bound)) violations.push_back("eta outside (0, " + io::format_double(bound) + "]");
  } else {
    bound = eta_bound_sync(steps.chi, steps.theta);
    if (!(steps.eta > 0 && steps.eta < bound)) violations.push_back("eta outside (0, " + io::format_double(bound) + ")");
  }
  if (!violations.empty() && !cfg.unsafe) {
    std::string msg = "inadmissible step config:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw InvalidParameter(msg + " (use --unsafe to run anyway)");
  }

  const auto reference = resolve_reference(cfg, game);
  SolveOutcome out;
  Json& s = out.summary;
  s["algorithm"] = cfg.algorithm;
  s["seed"] = cfg.seed;
  s["tol"] = cfg.tol;
  s["steps"] = io::steps_to_json(steps);
  s["eta_bound"] = bound;
  s["bound_violations"] = violations;
  s["unsafe"] = cfg.unsafe;

  Vector<double> x, lambda_mean;
  std::int64_t compute_ns = 0;
  if (!async) {
    SolveOptions<double> opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    opts.reference = reference;
    opts.record_every = cfg.record_every;
    opts.unsafe = true;
    auto res = sdgeno_solve(game, steps, opts);
    s["epochs"] = res.iterations;
    s["activations"] = res.iterations * N;
    out.converged = res.converged;
    out.trace = std::move(res.trace);
    x = res.x;
    lambda_mean = res.lambda_mean;
    compute_ns = res.compute_ns;
  } else {
    s["scenario"] = cfg.scenario;
    s["p_min"] = activation.p_min();
    s["max_delay"] = delays.max_delay();
    AsyncOptions<double> opts;
    opts.tol = cfg.tol;
    opts.max_activations = cfg.max_iter * N;
    opts.reference = reference;
    opts.record_every = cfg.record_every;
    opts.record_schedule = !cfg.schedule_out.empty();
    AsyncResult<double> res;
    if (cfg.replay_path.empty()) {
      ModelSchedule source(game.graph(), activation, delays);
      res = run_async(game, steps, async_kind(cfg.algorithm), source, opts);
    } else {
      std::ifstream in(cfg.replay_path);
      if (!in) throw InvalidParameter("cannot open " + cfg.replay_path);
      ReplaySchedule source(game.graph(), io::read_schedule_csv(in));
      s["replay"] = cfg.replay_path;
      res = run_async(game, steps, async_kind(cfg.algorithm), source, opts);
    }
    s["epochs"] = res.epochs;
    s["activations"] = res.activations;
    if (opts.record_schedule) s["max_realized_delay"] = res.max_realized_delay;
    out.converged = res.converged;
    out.trace = std::move(res.trace);
    out.schedule = std::move(res.schedule);
    x = res.x;
    lambda_mean = res.lambda_mean;
    compute_ns = res.compute_ns;
  }
  const auto& last = out.trace.back();
  s["converged"] = out.converged;
  s["final"] = {{"kkt_primal", last.kkt_primal}, {"kkt_dual", last.kkt_dual}, {"disagreement", last.disagreement}, {"violation", last.violation}};
  if (reference) s["final"]["rel_dist_to_opt"] = last.rel_dist_to_opt;
  s["compute_ms"] = static_cast<double>(compute_ns) * 1e-6;
  s["x"] = vec_json(x);
  s["lambda"] = vec_json(lambda_mean);
  return out;
}

int cmd_generate(const GenerateConfig& cfg) {
  const auto game = generate_game(cfg);
  emit(cfg.out, io::game_to_json(game).dump(2) + "\n");
  return kOk;
}

int cmd_solve(const SolveConfig& cfg) {
  SolveOutcome res = run_solve(cfg);
  emit(cfg.trace_out, io::trace_csv(res.trace));
  if (!cfg.summary_out.empty()) io::write_file(cfg.summary_out, res.summary.dump(2) + "\n");
  if (!cfg.schedule_out.empty()) {
    std::ostringstream ss;
    io::write_schedule_csv(ss, res.schedule);
    io::write_file(cfg.schedule_out, ss.str());
  }
  if (!cfg.plot_out.empty()) {
    const std::string title = cfg.algorithm + (cfg.algorithm == "sd-geno" ? std::string() : ", scenario " + cfg.scenario);
    io::write_file(cfg.plot_out, plot::convergence_svg({{cfg.algorithm, &res.trace}}, title));
  }
  if (!res.converged) {
    std::cerr << "no convergence to tol " << cfg.tol << " within " << res.summary["epochs"].get<Index>() << " epochs\n";
    return kNonConvergence;
  }
  return kOk;
}

std::vector<SweepRun> run_sweep(const CompareConfig& cfg) {
  const auto has = [&](const char* a) { return std::find(cfg.algorithms.begin(), cfg.algorithms.end(), a) != cfg.algorithms.end(); };
  if (cfg.algorithms.size() < 2) throw InvalidParameter("compare needs at least two algorithms");
  for (const auto& a : cfg.algorithms)
    if (a != "ad-geed" && a != "ad-geno") throw InvalidParameter("compare supports ad-geed and ad-geno, got '" + a + "'");
  if (!has("ad-geed") || !has("ad-geno")) throw InvalidParameter("compare needs both ad-geed and ad-geno");
  if (cfg.degrees.empty() || cfg.seeds.empty()) throw InvalidParameter("compare needs at least one degree and one seed");
  if (cfg.repeats < 1 || cfg.jobs < 1) throw InvalidParameter("--repeats and --jobs must be positive");
  if (cfg.max_epochs < 0 || cfg.max_iter < 1) throw InvalidParameter("epoch budgets must be positive");
  if (cfg.scenario != "A" && cfg.scenario != "B" && cfg.scenario != "C") throw InvalidParameter("compare scenario must be A, B or C");
  const Scenario scenario = cfg.scenario == "A" ? Scenario::A : cfg.scenario == "B" ? Scenario::B : Scenario::C;
  for (double d : cfg.degrees) {
    if (d < 2.0 * static_cast<double>(cfg.n - 1) / static_cast<double>(cfg.n) - 0.5 || d > static_cast<double>(cfg.n - 1)) {
      throw InfeasibleDegree("average degree " + io::format_double(d) + " impossible for a connected graph on " + std::to_string(cfg.n) + " nodes");
    }
  }

  std::vector<SweepRun> runs;
  for (double d : cfg.degrees)
    for (std::uint64_t seed : cfg.seeds) runs.push_back({d, seed});

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto worker = [&]() {
    for (std::size_t idx = next++; idx < runs.size(); idx = next++) {
      try {
        SweepRun& run = runs[idx];
        const auto inst = generate_instance<double>(sweep_spec(cfg.n, run.degree, run.seed, cfg.equality));
        const auto& game = inst.game;
        auto steps = derive_steps<double>(game, cfg.rho, std::nullopt, cfg.safety);
        const auto [activation, delays] = scenario_config(scenario, game.num_agents(), run.seed);
        steps.eta = eta_bound_async(steps.chi, steps.theta, game.num_agents(), activation.p_min(), delays.max_delay(), cfg.c);
        AsyncOptions<double> opts;
        opts.tol = cfg.max_epochs > 0 ? 0.0 : cfg.tol;
        opts.max_activations = (cfg.max_epochs > 0 ? cfg.max_epochs : cfg.max_iter) * game.num_agents();
        opts.record_every = std::numeric_limits<Index>::max();
        run.time_geed_ns = std::numeric_limits<std::int64_t>::max();
        run.time_geno_ns = std::numeric_limits<std::int64_t>::max();
        for (int r = 0; r < cfg.repeats; ++r) {
          for (int pass = 0; pass < 2; ++pass) {
            const bool geed = (pass == 0) == (r % 2 == 0);
            ModelSchedule source(game.graph(), activation, delays);
            const auto res = run_async(game, steps, geed ? AsyncAlgorithm::geed : AsyncAlgorithm::geno, source, opts);
            if (geed) {
              run.time_geed_ns = std::min(run.time_geed_ns, res.compute_ns);
              run.epochs_geed = res.epochs;
              run.converged_geed = res.converged;
            } else {
              run.time_geno_ns = std::min(run.time_geno_ns, res.compute_ns);
              run.epochs_geno = res.epochs;
              run.converged_geno = res.converged;
            }
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(runs.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return runs;
}

std::vector<SweepRow> aggregate_sweep(const std::vector<SweepRun>& runs) {
  std::map<double, std::vector<const SweepRun*>> by_degree;
  for (const auto& r : runs) by_degree[r.degree].push_back(&r);
  std::vector<SweepRow> rows;
  for (const auto& [degree, group] : by_degree) {
    SweepRow row;
    row.avg_degree = degree;
    for (const SweepRun* r : group) {
      row.time_geed_ms += static_cast<double>(r->time_geed_ns) * 1e-6;
      row.time_geno_ms += static_cast<double>(r->time_geno_ns) * 1e-6;
      row.epochs_geed += static_cast<double>(r->epochs_geed);
      row.epochs_geno += static_cast<double>(r->epochs_geno);
    }
    row.epochs_geed /= static_cast<double>(group.size());
    row.epochs_geno /= static_cast<double>(group.size());
    row.speedup_percent = row.time_geed_ms > 0 ? 100.0 * (row.time_geed_ms - row.time_geno_ms) / row.time_geed_ms : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "avg_degree,time_geed,time_geno,epochs_geed,epochs_geno,speedup_percent\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.avg_degree, r.time_geed_ms, r.time_geno_ms, r.epochs_geed,
                  r.epochs_geno, r.speedup_percent);
    os << buf;
  }
  return os.str();
}

std::string sweep_detail_csv(const std::vector<SweepRun>& runs) {
  std::ostringstream os;
  os << "avg_degree,seed,time_geed_ns,time_geno_ns,epochs_geed,epochs_geno,converged_geed,converged_geno\n";
  for (const auto& r : runs) {
    os << io::format_double(r.degree) << ',' << r.seed << ',' << r.time_geed_ns << ',' << r.time_geno_ns << ',' << r.epochs_geed << ','
       << r.epochs_geno << ',' << (r.converged_geed ? 1 : 0) << ',' << (r.converged_geno ? 1 : 0) << '\n';
  }
  return os.str();
}

int cmd_compare(const CompareConfig& cfg) {
  const auto runs = run_sweep(cfg);
  emit(cfg.out, sweep_csv(aggregate_sweep(runs)));
  if (!cfg.detail_out.empty()) io::write_file(cfg.detail_out, sweep_detail_csv(runs));
  if (cfg.max_epochs == 0) {
    for (const auto& r : runs) {
      if (!r.converged_geed || !r.converged_geno) {
        std::cerr << "no convergence at degree " << r.degree << ", seed " << r.seed << "\n";
        return kNonConvergence;
      }
    }
  }
  return kOk;
}

int cmd_oracle(const OracleConfig& cfg) {
  const auto game = load_or_generate(cfg.game_path, cfg.inline_game);
  if (cfg.tol <= 0) throw InvalidParameter("--tol must be positive");
  const auto sol = vgne_oracle<double>(game, cfg.tol, cfg.max_iter);
  Json j;
  j["x"] = vec_json(sol.x);
  j["lambda"] = vec_json(sol.lambda);
  j["residual"] = {{"primal", sol.residual.primal}, {"dual", sol.residual.dual}, {"violation", sol.residual.violation}};
  j["iterations"] = sol.iterations;
  j["step"] = sol.step;
  emit(cfg.out, j.dump(2) + "\n");
  return kOk;
}

}  // namespace gne::cli
