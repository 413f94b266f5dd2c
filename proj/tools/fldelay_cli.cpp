#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fldelay/fl_sim.hpp"
#include "fldelay/json_io.hpp"
#include "fldelay/model.hpp"
#include "fldelay/optimizer.hpp"
#include "fldelay/sweep.hpp"
#include "fldelay/verify.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 invalid input, 3 infeasible problem,
// 4 internal invariant violation.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvalidInput = 2;
constexpr int kInfeasible = 3;
constexpr int kInvariant = 4;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

void print_warnings(const fldelay::model::Scenario& sc) {
  for (const auto& w : fldelay::model::scenario_warnings(sc))
    std::cerr << "warning: " << w << "\n";
}

struct GenArgs {
  std::uint64_t seed = 0;
  int k = 50;
  std::string out;
  bool no_timestamp = false;
  fldelay::model::ScenarioOverrides ov;
};

int run_gen(const GenArgs& a) {
  const auto sc = fldelay::model::generate_scenario(a.seed, a.k, a.ov);
  print_warnings(sc);
  fldelay::io::save_scenario(sc, a.out, !a.no_timestamp);
  return kOk;
}

struct OptimizeArgs {
  std::string scenario_path;
  std::string scheme = "proposed";
  std::string out;
  double rel_tol = 1e-3;
  bool no_timestamp = false;
};

int run_optimize(const OptimizeArgs& a) {
  const auto sc = fldelay::io::load_scenario(a.scenario_path);
  print_warnings(sc);
  const auto scheme = fldelay::opt::scheme_from_name(a.scheme);
  fldelay::opt::Allocation al;
  switch (*scheme) {
    case fldelay::opt::Scheme::Proposed:
      al = fldelay::opt::minimize_delay(sc, a.rel_tol);
      break;
    case fldelay::opt::Scheme::EbFdma:
      al = fldelay::opt::baseline_eb_fdma(sc);
      break;
    case fldelay::opt::Scheme::FeFdma:
      al = fldelay::opt::baseline_fe_fdma(sc, a.rel_tol);
      break;
    case fldelay::opt::Scheme::Tdma:
      al = fldelay::opt::baseline_tdma(sc);
      break;
  }
  const auto violations = fldelay::opt::allocation_violations(al, sc);
  if (!violations.empty()) {
    for (const auto& v : violations)
      std::cerr << "invariant violation: " << v << "\n";
    return kInvariant;
  }
  fldelay::io::save_allocation(al, a.out, !a.no_timestamp);
  std::cout << "scheme=" << fldelay::opt::scheme_name(al.scheme)
            << " total_delay_s=" << format_double(al.total_delay)
            << " eta=" << format_double(al.eta) << "\n";
  return kOk;
}

struct SweepArgs {
  std::string param = "p_max_dbm";
  std::vector<double> values;
  int draws = 50;
  std::uint64_t seed = 0;
  int k = 50;
  std::vector<std::string> schemes = {"proposed"};
  std::string out;
};

int run_sweep_cmd(const SweepArgs& a) {
  fldelay::sweep::SweepSpec spec;
  spec.param = *fldelay::sweep::param_from_name(a.param);
  spec.values = a.values;
  spec.draws = a.draws;
  spec.base_seed = a.seed;
  spec.user_count = a.k;
  std::vector<fldelay::opt::Scheme> schemes;
  for (const auto& name : a.schemes) {
    const auto s = fldelay::opt::scheme_from_name(name);
    if (!s) throw fldelay::io::SchemaError("/schemes", "unknown scheme '" + name + "'");
    schemes.push_back(*s);
  }
  const auto rows = fldelay::sweep::run_sweep(spec, schemes);
  write_text(a.out, fldelay::sweep::sweep_csv(rows));
  return kOk;
}

struct TrainArgs {
  std::string data = "synth";
  std::string loss = "convex";
  double eta = 0.5;
  double ridge = 0.0;
  int rounds = 500;
  int k = 5;
  int dim = 10;
  int samples = 100;
  double cond = 10.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> xi, delta, epsilon0;
  std::string out;
};

int run_train(const TrainArgs& a) {
  using namespace fldelay::fl;
  const LossKind kind =
      a.loss == "convex" ? LossKind::ConvexSquared : LossKind::NonconvexReluSquared;
  const LossSpec spec{kind, a.ridge};

  Dataset ds;
  if (a.data == "synth") {
    ds = synth_dataset(a.seed, a.k, a.dim, a.samples, a.cond, a.noise);
  } else {
    ds = partition_users(load_csv(a.data), a.k, a.samples, a.seed);
  }

  TrainConfig cfg;
  cfg.global_accuracy = a.epsilon0.value_or(1e-3);
  double lipschitz = 0.0, gamma = 0.0;
  if (kind == LossKind::ConvexSquared) {
    const auto sm = estimate_smoothness(ds, spec);
    lipschitz = sm.lipschitz;
    gamma = sm.strong_convexity;
    if (sm.degenerate)
      std::cerr << "warning: some per-user Hessian is singular; gamma "
                << format_double(gamma)
                << " (consider --ridge for real data)\n";
  } else {
    // No curvature constants for the nonconvex loss; fall back to the
    // convexified design for the step-size bookkeeping.
    const auto sm = estimate_smoothness(ds, {LossKind::ConvexSquared, a.ridge});
    lipschitz = sm.lipschitz;
    gamma = sm.strong_convexity;
  }
  // A singular Hessian would blow the local iteration count sky-high; fall
  // back to the unit-ratio bookkeeping instead.
  if (gamma <= 0.0) gamma = lipschitz;
  cfg.xi = a.xi.value_or(std::min(1.0, gamma / lipschitz));
  cfg.step = a.delta.value_or(1.0 / lipschitz);
  if (!(cfg.step < 2.0 / lipschitz))
    throw fldelay::io::SchemaError("/delta", "must be below 2/L = " +
                                                 format_double(2.0 / lipschitz));
  cfg.local_iter_coeff =
      2.0 / ((2.0 - lipschitz * cfg.step) * cfg.step * gamma);
  const double steps_per_round =
      std::ceil(cfg.local_iter_coeff * std::log2(1.0 / a.eta));
  if (steps_per_round > 1e6)
    throw fldelay::io::SchemaError(
        "/data", "conditioning demands " + format_double(steps_per_round) +
                     " local steps per round; add --ridge or set --xi/--delta "
                     "explicitly");

  const auto log = federated_train(ds, spec, a.eta, cfg, a.rounds);

  std::string csv = "round,global_loss,accuracy_ratio,local_iters\n";
  for (const auto& r : log.rounds) {
    csv += std::to_string(r.round) + ',' + format_double(r.global_loss) + ',';
    if (r.accuracy_ratio) csv += format_double(*r.accuracy_ratio);
    csv += ',' + std::to_string(r.local_iters) + '\n';
  }
  write_text(a.out, csv);
  std::cout << "rounds=" << log.rounds.back().round
            << " final_loss=" << format_double(log.rounds.back().global_loss)
            << (log.reached_accuracy ? " reached_accuracy=1" : " reached_accuracy=0")
            << "\n";
  return kOk;
}

int run_verify(const std::string& level) {
  using namespace fldelay::verify;
  const auto results =
      run_checks(level == "fast" ? Level::Fast : Level::Full);
  for (const auto& r : results) {
    std::printf("%s  %-32s (%.2f s)  %s\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.seconds, r.detail.c_str());
  }
  return all_passed(results) ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fldelay: joint learning-accuracy / transmit-time / bandwidth "
      "optimization for federated learning over a wireless uplink"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen", "Generate a random scenario file");
  cmd_gen->add_option("--seed", gen.seed, "RNG seed");
  cmd_gen->add_option("--k", gen.k, "number of users")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--out", gen.out, "output scenario JSON")->required();
  cmd_gen->add_flag("--no-timestamp", gen.no_timestamp,
                    "omit the generated_at_utc field");
  double g_pmax = 0, g_fmax = 0, g_bw = 0, g_bits = 0, g_L = 0, g_gamma = 0,
         g_xi = 0, g_delta = 0, g_eps = 0;
  std::int64_t g_samples = 0;
  cmd_gen->add_option("--p-max-dbm", g_pmax, "override p_max (dBm)");
  cmd_gen->add_option("--f-max-hz", g_fmax, "override f_max (Hz)");
  cmd_gen->add_option("--bandwidth-hz", g_bw, "override B (Hz)");
  cmd_gen->add_option("--upload-bits", g_bits, "override upload size (bits)");
  cmd_gen->add_option("--samples", g_samples, "override D_k");
  cmd_gen->add_option("--lipschitz", g_L);
  cmd_gen->add_option("--gamma", g_gamma);
  cmd_gen->add_option("--xi", g_xi);
  cmd_gen->add_option("--delta", g_delta);
  cmd_gen->add_option("--epsilon0", g_eps);
  auto apply_gen_overrides = [&]() {
    if (cmd_gen->count("--p-max-dbm")) gen.ov.p_max_dbm = g_pmax;
    if (cmd_gen->count("--f-max-hz")) gen.ov.f_max_hz = g_fmax;
    if (cmd_gen->count("--bandwidth-hz")) gen.ov.bandwidth_hz = g_bw;
    if (cmd_gen->count("--upload-bits")) gen.ov.upload_bits = g_bits;
    if (cmd_gen->count("--samples")) gen.ov.samples = g_samples;
    if (cmd_gen->count("--lipschitz")) gen.ov.lipschitz = g_L;
    if (cmd_gen->count("--gamma")) gen.ov.gamma = g_gamma;
    if (cmd_gen->count("--xi")) gen.ov.xi = g_xi;
    if (cmd_gen->count("--delta")) gen.ov.delta = g_delta;
    if (cmd_gen->count("--epsilon0")) gen.ov.epsilon0 = g_eps;
  };

  OptimizeArgs optimize;
  auto* cmd_opt = app.add_subcommand("optimize", "Solve one scenario");
  cmd_opt->add_option("--scenario", optimize.scenario_path, "scenario JSON")
      ->required();
  cmd_opt->add_option("--scheme", optimize.scheme)
      ->check(CLI::IsMember({"proposed", "eb-fdma", "fe-fdma", "tdma"}));
  cmd_opt->add_option("--rel-tol", optimize.rel_tol, "outer bisection stop")
      ->check(CLI::PositiveNumber);
  cmd_opt->add_option("--out", optimize.out, "output allocation JSON")
      ->required();
  cmd_opt->add_flag("--no-timestamp", optimize.no_timestamp);

  SweepArgs sw;
  auto* cmd_sweep = app.add_subcommand(
      "sweep", "Mean delay over seeded scenario draws for a parameter ladder");
  cmd_sweep->add_option("--param", sw.param)
      ->check(CLI::IsMember({"p_max_dbm", "bandwidth_hz", "k", "upload_bits"}));
  cmd_sweep->add_option("--values", sw.values, "parameter values")
      ->required()
      ->delimiter(',');
  cmd_sweep
      ->add_option("--draws", sw.draws,
                   "scenario draws per value (default 50; full-scale "
                   "averaging uses 1000)")
      ->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--seed", sw.seed, "base seed; draw i uses seed+i");
  cmd_sweep->add_option("--k", sw.k, "users per draw (unless sweeping k)")
      ->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--schemes", sw.schemes)->delimiter(',');
  cmd_sweep->add_option("--out", sw.out, "output CSV")->required();

  TrainArgs tr;
  auto* cmd_train =
      app.add_subcommand("train", "Run federated training and log the loss");
  cmd_train->add_option("--data", tr.data, "'synth' or a CSV path");
  cmd_train->add_option("--loss", tr.loss)
      ->check(CLI::IsMember({"convex", "nonconvex"}));
  cmd_train->add_option("--eta", tr.eta, "local accuracy in (0,1)")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));
  cmd_train->add_option("--ridge", tr.ridge)->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--rounds", tr.rounds)->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--k", tr.k)->check(CLI::PositiveNumber);
  cmd_train->add_option("--d", tr.dim, "feature dimension (synth)")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--samples", tr.samples, "samples per user")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--cond", tr.cond, "condition number (synth)");
  cmd_train->add_option("--noise", tr.noise, "target noise std (synth)");
  cmd_train->add_option("--seed", tr.seed);
  double t_xi = 0, t_delta = 0, t_eps = 0;
  cmd_train->add_option("--xi", t_xi, "surrogate correction weight");
  cmd_train->add_option("--delta", t_delta, "local gradient step");
  cmd_train->add_option("--epsilon0", t_eps, "global accuracy target");
  cmd_train->add_option("--out", tr.out, "output TrainLog CSV")->required();
  auto apply_train_overrides = [&]() {
    if (cmd_train->count("--xi")) tr.xi = t_xi;
    if (cmd_train->count("--delta")) tr.delta = t_delta;
    if (cmd_train->count("--epsilon0")) tr.epsilon0 = t_eps;
  };

  std::string verify_level = "fast";
  auto* cmd_verify =
      app.add_subcommand("verify", "Run the built-in verification suites");
  cmd_verify->add_option("--level", verify_level)
      ->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*cmd_gen) {
      apply_gen_overrides();
      return run_gen(gen);
    }
    if (*cmd_train) {
      apply_train_overrides();
      return run_train(tr);
    }
    if (*cmd_opt) return run_optimize(optimize);
    if (*cmd_sweep) return run_sweep_cmd(sw);
    if (*cmd_verify) return run_verify(verify_level);
  } catch (const fldelay::io::SchemaError& e) {
    std::cerr << "error: invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kUsage;
}
