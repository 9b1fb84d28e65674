#include "experiment.hpp"
#include "io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <typeinfo>

namespace gne::cli {

namespace {

void add_game_source(CLI::App* sub, std::string& path, GenerateConfig& gen) {
  sub->add_option("--game", path, "game instance JSON file (default: generate inline)");
  sub->add_option("--n", gen.n, "inline game: number of firms");
  sub->add_option("--m", gen.m, "inline game: number of markets");
  sub->add_flag("--equality", gen.equality, "inline game: equality coupling");
  sub->add_option("--avg-degree", gen.avg_degree, "inline game: random connected graph with this average degree");
  sub->add_option("--dim-choices", gen.dim_choices, "inline game: per-firm strategy sizes drawn from this set");
}

void add_solve_options(CLI::App* sub, SolveConfig& s) {
  add_game_source(sub, s.game_path, s.inline_game);
  sub->add_option("--algorithm", s.algorithm, "sd-geno | ad-geed | ad-geno");
  sub->add_option("--scenario", s.scenario, "A | B | C | custom");
  sub->add_option("--probabilities", s.probabilities, "custom scenario: activation probabilities");
  sub->add_flag("--round-robin", s.round_robin, "custom scenario: cyclic activation");
  sub->add_option("--delay-mode", s.delay_mode, "custom scenario: zero | fixed | uniform");
  sub->add_option("--max-delay", s.max_delay, "custom scenario: delay bound");
  sub->add_option("--rho", s.rho, "consensus gain in (0, 1]");
  sub->add_option("--theta", s.theta, "preconditioner margin (default 1/chi)");
  sub->add_option("--eta", s.eta, "relaxation (default from the bound)");
  sub->add_option("--safety", s.safety, "fraction of each step-size bound");
  sub->add_option("--c", s.c, "constant in the asynchronous relaxation bound");
  sub->add_option("--tol", s.tol, "stopping tolerance on the residuals");
  sub->add_option("--max-iter", s.max_iter, "iteration or epoch cap");
  sub->add_option("--seed", s.seed, "seed for inline generation and schedules");
  sub->add_option("--reference", s.reference, "oracle | none | JSON file with \"x\"");
  sub->add_option("--record-every", s.record_every, "epochs between trace rows");
  sub->add_flag("--unsafe", s.unsafe, "run even when steps violate their bounds");
  sub->add_option("--trace", s.trace_out, "trace CSV path (default stdout)");
  sub->add_option("--summary", s.summary_out, "summary JSON path");
  sub->add_option("--plot", s.plot_out, "three-panel SVG path");
  sub->add_option("--schedule-out", s.schedule_out, "record the realized schedule as CSV");
}

/// Applies a flat JSON object of option values to options not given on the
/// command line. Keys are long option names with or without dashes.
void apply_config(CLI::App* sub, const std::string& path) {
  io::Json j;
  try {
    j = io::Json::parse(io::read_file(path));
  } catch (const io::Json::parse_error& e) {
    throw InvalidParameter(path + ": " + e.what());
  }
  if (!j.is_object()) throw InvalidParameter(path + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    for (char& ch : name)
      if (ch == '_') ch = '-';
    CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr || name == "config") throw InvalidParameter(path + ": unknown key \"" + key + "\"");
    if (opt->count() > 0) continue;
    std::vector<std::string> inputs;
    const auto add = [&](const io::Json& v) {
      if (v.is_string()) {
        inputs.push_back(v.get<std::string>());
      } else if (v.is_boolean()) {
        inputs.push_back(v.get<bool>() ? "true" : "false");
      } else if (v.is_number_integer()) {
        inputs.push_back(std::to_string(v.get<long long>()));
      } else if (v.is_number()) {
        inputs.push_back(io::format_double(v.get<double>()));
      } else {
        throw InvalidParameter(path + ": unsupported value for \"" + key + "\"");
      }
    };
    if (value.is_array()) {
      for (const auto& v : value) add(v);
    } else {
      add(value);
    }
    if (opt->get_type_size() == 0) {
      if (inputs.size() != 1 || (inputs[0] != "true" && inputs[0] != "false")) throw InvalidParameter(path + ": \"" + key + "\" must be a boolean");
      if (inputs[0] == "false") continue;
      inputs = {"true"};
    }
    opt->add_result(inputs);
    opt->run_callback();
  }
}

bool seed_on_command_line(int argc, const char* const* argv) {
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--seed") == 0 || std::strncmp(argv[a], "--seed=", 7) == 0) return true;
  }
  return false;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"gne-forge: distributed generalized Nash equilibrium seeking experiments"};
  app.require_subcommand(1);
  std::string config_path;

  GenerateConfig gen;
  auto* g = app.add_subcommand("generate", "draw a seeded network Cournot instance");
  g->add_option("--n", gen.n, "number of firms");
  g->add_option("--m", gen.m, "number of markets");
  g->add_option("--seed", gen.seed, "instance seed");
  g->add_flag("--equality", gen.equality, "equality coupling");
  g->add_option("--avg-degree", gen.avg_degree, "random connected graph with this average degree");
  g->add_option("--dim-choices", gen.dim_choices, "per-firm strategy sizes drawn from this set");
  g->add_option("--out", gen.out, "output path (default stdout)");
  g->add_option("--config", config_path, "JSON config; flags win");

  SolveConfig solve;
  auto* s = app.add_subcommand("solve", "run one algorithm and write a trace");
  add_solve_options(s, solve);
  s->add_option("--replay", solve.replay_path, "replay a recorded schedule CSV");
  s->add_option("--config", config_path, "JSON config; flags win");

  SolveConfig replay;
  replay.algorithm = "ad-geno";
  auto* r = app.add_subcommand("replay", "rerun an asynchronous algorithm on a recorded schedule");
  add_solve_options(r, replay);
  r->add_option("--schedule", replay.replay_path, "recorded schedule CSV")->required();
  r->add_option("--config", config_path, "JSON config; flags win");

  CompareConfig cmp;
  auto* c = app.add_subcommand("compare", "AD-GEED vs AD-GENO compute time over a graph-density sweep");
  c->add_option("--algorithms", cmp.algorithms, "algorithms to compare")->delimiter(',');
  c->add_option("--n", cmp.n, "number of firms");
  c->add_option("--degrees", cmp.degrees, "average degrees")->delimiter(',');
  c->add_option("--seeds", cmp.seeds, "instance seeds")->delimiter(',');
  c->add_option("--scenario", cmp.scenario, "A | B | C");
  c->add_option("--rho", cmp.rho, "consensus gain");
  c->add_option("--safety", cmp.safety, "fraction of each step-size bound");
  c->add_option("--c", cmp.c, "constant in the asynchronous relaxation bound");
  c->add_option("--tol", cmp.tol, "stopping tolerance");
  c->add_option("--max-iter", cmp.max_iter, "epoch cap when running to tol");
  c->add_option("--max-epochs", cmp.max_epochs, "fixed epoch budget per run (0: run to tol)");
  c->add_option("--repeats", cmp.repeats, "timing repeats; the minimum is kept");
  c->add_option("--jobs", cmp.jobs, "parallel workers");
  c->add_option("--out", cmp.out, "comparison CSV path (default stdout)");
  c->add_option("--detail", cmp.detail_out, "per-run CSV path");
  c->add_option("--config", config_path, "JSON config; flags win");
  bool equality_off = false;
  c->add_flag("--inequality", equality_off, "inequality coupling instead of equality");

  OracleConfig orc;
  auto* o = app.add_subcommand("oracle", "reference equilibrium by extragradient");
  add_game_source(o, orc.game_path, orc.inline_game);
  o->add_option("--seed", orc.inline_game.seed, "inline game seed");
  o->add_option("--tol", orc.tol, "natural-map residual tolerance");
  o->add_option("--max-iter", orc.max_iter, "iteration cap");
  o->add_option("--out", orc.out, "output path (default stdout)");
  o->add_option("--config", config_path, "JSON config; flags win");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(active, config_path);
    std::uint64_t* seed = active == g ? &gen.seed : active == s ? &solve.seed : active == r ? &replay.seed : active == o ? &orc.inline_game.seed : nullptr;
    if (const char* env = std::getenv("GNE_FORGE_SEED"); env != nullptr && seed != nullptr && !seed_on_command_line(argc, argv)) {
      try {
        std::size_t used = 0;
        *seed = std::stoull(env, &used);
        if (used != std::strlen(env)) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw InvalidParameter(std::string("GNE_FORGE_SEED is not an unsigned integer: ") + env);
      }
    }
    if (active == g) return cmd_generate(gen);
    if (active == s) return cmd_solve(solve);
    if (active == r) return cmd_solve(replay);
    if (active == c) {
      if (equality_off) cmp.equality = false;
      return cmd_compare(cmp);
    }
    return cmd_oracle(orc);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    // Only the base class signals an iteration cap; every subclass is bad input.
    return typeid(e) == typeid(Error) ? kNonConvergence : kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

}  // namespace gne::cli
