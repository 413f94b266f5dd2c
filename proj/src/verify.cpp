#include "fldelay/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "fldelay/fl_sim.hpp"
#include "fldelay/model.hpp"
#include "fldelay/numerics.hpp"
#include "fldelay/optimizer.hpp"
#include "fldelay/rng.hpp"
#include "fldelay/sweep.hpp"

namespace fldelay::verify {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// Forward-only oracle: feasibility of a delay budget T checked with nothing
// but the rate formula, plain bisection on bandwidth, and an eta grid.
// Deliberately avoids the Lambert inversion and golden-section paths.

double oracle_rate(double b, double c) {  // c = g*p/n0, Hz
  if (b <= 0.0) return 0.0;
  return b * std::log1p(c / b) / kLn2;
}

// Least b with oracle_rate(b, c) >= rate; +inf when 1e18 Hz is not enough.
double oracle_min_bandwidth(double rate, double c) {
  if (rate <= 0.0) return 0.0;
  const double hi = 1e18;
  if (oracle_rate(hi, c) < rate) return kInf;
  double lo = rate * 1e-9;
  double a = lo, b = hi;
  while ((b - a) > 1e-13 * b) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (oracle_rate(mid, c) >= rate)
      b = mid;
    else
      a = mid;
  }
  return b;
}

double oracle_tstar(double eta, double T, double a, double A, double f) {
  return (1.0 - eta) * T / a + A * std::log2(eta) / f;
}

// Total bandwidth needed at (eta, T) when every user stretches its transmit
// window to the limit; +inf when some window is closed or unreachable.
double oracle_total_bandwidth(double eta, double T, const model::Scenario& sc) {
  double sum = 0.0;
  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    const auto& u = sc.users[k];
    const double t =
        oracle_tstar(eta, T, sc.derived.a, sc.derived.workload[k], u.f_max);
    if (!(t > 0.0)) return kInf;
    const double c = u.gain * u.p_max / sc.net.noise_psd;
    const double b = oracle_min_bandwidth(sc.net.upload_bits / t, c);
    if (!std::isfinite(b)) return kInf;
    sum += b;
  }
  return std::min(sum, 1e300);
}

// Minimum of the bandwidth sum over a 200-point eta grid spanning the window
// where every transmit budget is positive, plus one local ternary refinement.
double oracle_min_total_bandwidth(double T, const model::Scenario& sc,
                                  int grid_points = 200) {
  auto window_open = [&](double eta) {
    for (std::size_t k = 0; k < sc.users.size(); ++k)
      if (!(oracle_tstar(eta, T, sc.derived.a, sc.derived.workload[k],
                         sc.users[k].f_max) > 0.0))
        return false;
    return true;
  };

  constexpr int kScan = 4096;
  int first = -1, last = -1;
  for (int i = 0; i < kScan; ++i) {
    const double eta = (i + 0.5) / kScan;
    if (window_open(eta)) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return kInf;

  double lo = (first + 0.5) / kScan;
  if (first > 0) {
    double bad = (first - 0.5) / kScan;
    for (int i = 0; i < 50; ++i) {
      const double mid = 0.5 * (bad + lo);
      (window_open(mid) ? lo : bad) = mid;
    }
  }
  double hi = (last + 0.5) / kScan;
  if (last < kScan - 1) {
    double bad = (last + 1.5) / kScan;
    for (int i = 0; i < 50; ++i) {
      const double mid = 0.5 * (hi + bad);
      (window_open(mid) ? hi : bad) = mid;
    }
  }

  double best = kInf;
  double best_eta = 0.5 * (lo + hi);
  for (int j = 0; j < grid_points; ++j) {
    const double eta = lo + (hi - lo) * (j + 0.5) / grid_points;
    const double v = oracle_total_bandwidth(eta, T, sc);
    if (v < best) {
      best = v;
      best_eta = eta;
    }
  }
  if (!std::isfinite(best)) return kInf;

  const double step = (hi - lo) / grid_points;
  double ra = std::max(lo, best_eta - step);
  double rb = std::min(hi, best_eta + step);
  for (int i = 0; i < 60; ++i) {
    const double m1 = ra + (rb - ra) / 3.0;
    const double m2 = rb - (rb - ra) / 3.0;
    if (oracle_total_bandwidth(m1, T, sc) <= oracle_total_bandwidth(m2, T, sc))
      rb = m2;
    else
      ra = m1;
  }
  best = std::min(best, oracle_total_bandwidth(0.5 * (ra + rb), T, sc));
  return best;
}

bool oracle_feasible(double T, const model::Scenario& sc) {
  return oracle_min_total_bandwidth(T, sc) <= sc.net.bandwidth;
}

// Smallest feasible delay per the oracle, to 1e-4 relative: doubling search
// for a feasible budget, then plain bisection.
double oracle_optimal_delay(const model::Scenario& sc) {
  double hi = 1e-6;
  int guard = 0;
  while (!oracle_feasible(hi, sc) && ++guard < 80) hi *= 2.0;
  double lo = hi / 2.0;
  while ((hi - lo) / hi > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    (oracle_feasible(mid, sc) ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------

using Body = std::function<bool(std::string&)>;

CheckResult run_timed(const std::string& name, const Body& body) {
  CheckResult r;
  r.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    r.pass = body(r.detail);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
  return r;
}

// 1. W_{-1} round trip over w in [-50, -1], 1e5 points, 1e-10 relative.
bool check_lambert_roundtrip(std::string& detail) {
  constexpr int n = 100000;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = -50.0 + 49.0 * i / (n - 1);
    const double x = w * std::exp(w);
    const double back = numerics::lambert_w_m1(x);
    worst = std::max(worst, std::abs(back - w) / std::abs(w));
  }
  detail = fmt("max relative error %.3g over 1e5 points (tol 1e-10)", worst);
  return worst <= 1e-10;
}

// 2. achievable_rate(required_bandwidth(r)) = r to 1e-9 relative for 1e4
// samples spanning six decades below the capacity ceiling.
bool check_rate_inversion(std::string& detail) {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double g = std::pow(10.0, rng.uniform(-13.0, -8.0));
    const double p = std::pow(10.0, rng.uniform(-3.0, 0.0));
    const double n0 = std::pow(10.0, rng.uniform(-21.0, -20.0));
    const double ceiling = model::capacity_ceiling(g, p, n0);
    const double r = ceiling * 0.999 * std::pow(10.0, rng.uniform(-6.0, 0.0));
    const double b = opt::required_bandwidth(r, g, p, n0);
    const double back = model::achievable_rate(b, p, g, n0);
    worst = std::max(worst, std::abs(back - r) / r);
  }
  detail = fmt("max relative error %.3g over 1e4 samples (tol 1e-9)", worst);
  return worst <= 1e-9;
}

// 3. Convexity of eta -> sum required bandwidth on 20 scenarios x 5 T values,
// 1000-point grids: second differences >= -1e-6 * local scale.
bool check_inner_convexity(std::string& detail) {
  double worst = 0.0;  // most negative normalized second difference
  for (int s = 0; s < 20; ++s) {
    const auto sc = model::generate_scenario(100 + s, 10);
    const double t0 = opt::minimize_delay(sc).total_delay;
    for (const double mult : {1.0, 1.3, 1.8, 2.5, 4.0}) {
      const double T = t0 * mult;
      const auto dom = opt::eta_domain(T, sc);
      if (!dom) {
        detail = fmt("empty eta domain at T multiplier %.1f", mult);
        return false;
      }
      constexpr int n = 1000;
      std::vector<double> f(n);
      for (int j = 0; j < n; ++j) {
        const double eta = dom->lo + dom->width() * (j + 0.5) / n;
        f[j] = opt::total_required_bandwidth(eta, T, sc);
        if (!std::isfinite(f[j])) {
          detail = "objective not finite in the domain interior";
          return false;
        }
      }
      for (int j = 1; j + 1 < n; ++j) {
        const double scale =
            std::max({std::abs(f[j - 1]), std::abs(f[j]), std::abs(f[j + 1])});
        const double d2 = f[j - 1] - 2.0 * f[j] + f[j + 1];
        worst = std::min(worst, d2 / scale);
      }
    }
  }
  detail = fmt("most negative normalized second difference %.3g (tol -1e-6)",
               worst);
  return worst >= -1e-6;
}

// 4. Fixed-T feasibility decisions match the forward grid oracle on 10 K=3
// scenarios x 50-rung ladders, outside 1% of the threshold.
bool check_feasibility_oracle(std::string& detail) {
  int tested = 0, skipped = 0;
  for (int s = 0; s < 10; ++s) {
    const auto sc = model::generate_scenario(200 + s, 3);
    const double t_star = opt::minimize_delay(sc, 1e-6).total_delay;
    for (int j = 0; j < 50; ++j) {
      const double T = t_star * (0.5 + 2.5 * j / 49.0);
      if (std::abs(T / t_star - 1.0) < 0.01) {
        ++skipped;
        continue;
      }
      ++tested;
      const bool impl = opt::check_feasible(T, sc).feasible;
      const bool oracle = oracle_feasible(T, sc);
      if (impl != oracle) {
        detail = fmt("disagreement at seed %g, T/T*=%.4f (impl says %.0f)",
                     200.0 + s, T / t_star, impl ? 1.0 : 0.0);
        return false;
      }
    }
  }
  detail = fmt("%g rungs agreed, %g near-threshold rungs excluded",
               double(tested), double(skipped));
  return true;
}

// 5. minimize_delay within 2% of the oracle optimum on 5 K=2 scenarios.
bool check_end_to_end(std::string& detail) {
  double worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    const auto sc = model::generate_scenario(300 + s, 2);
    const double impl = opt::minimize_delay(sc).total_delay;
    const double oracle = oracle_optimal_delay(sc);
    worst = std::max(worst, std::abs(impl - oracle) / oracle);
  }
  detail = fmt("max |T_impl - T_oracle|/T_oracle = %.4g (tol 0.02)", worst);
  return worst <= 0.02;
}

// 6. Proposed <= EB/FE delay per draw (1e-6 relative) and beats the TDMA
// approximation on the mean, over 100 K=50 scenarios.
bool check_dominance(std::string& detail) {
  double mean_prop = 0.0, mean_tdma = 0.0;
  for (int s = 0; s < 100; ++s) {
    const auto sc = model::generate_scenario(400 + s, 50);
    const double prop = opt::minimize_delay(sc, 1e-8).total_delay;
    const double eb = opt::baseline_eb_fdma(sc).total_delay;
    const double fe = opt::baseline_fe_fdma(sc).total_delay;
    const double td = opt::baseline_tdma(sc).total_delay;
    if (prop > eb * (1.0 + 1e-6)) {
      detail = fmt("seed %g: proposed %.6g > eb-fdma %.6g", 400.0 + s, prop, eb);
      return false;
    }
    if (prop > fe * (1.0 + 1e-6)) {
      detail = fmt("seed %g: proposed %.6g > fe-fdma %.6g", 400.0 + s, prop, fe);
      return false;
    }
    mean_prop += prop;
    mean_tdma += td;
  }
  mean_prop /= 100.0;
  mean_tdma /= 100.0;
  detail = fmt("mean proposed %.4g s vs mean tdma %.4g s (%.1f%% lower)",
               mean_prop, mean_tdma, (1.0 - mean_prop / mean_tdma) * 100.0);
  return mean_prop < mean_tdma;
}

// 7. Mean proposed delay strictly decreasing over p_max in {0,5,10,15,20} dBm
// (50 draws each).
bool check_power_trend(std::string& detail) {
  sweep::SweepSpec spec;
  spec.param = sweep::SweepParam::PMaxDbm;
  spec.values = {0.0, 5.0, 10.0, 15.0, 20.0};
  spec.draws = 50;
  spec.base_seed = 7000;
  spec.user_count = 50;
  const auto rows = sweep::run_sweep(spec, {opt::Scheme::Proposed});
  std::vector<double> means;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      detail = "solver failure inside the sweep: " + r.error;
      return false;
    }
    means.push_back(r.mean_delay);
  }
  std::ostringstream os;
  os.precision(5);
  for (std::size_t i = 0; i < means.size(); ++i)
    os << (i ? ", " : "means [s]: ") << means[i];
  detail = os.str();
  for (std::size_t i = 1; i < means.size(); ++i)
    if (!(means[i] < means[i - 1])) return false;
  return true;
}

// 8. Outer bisection reaches (T_max-T_min)/T_max <= 1e-3 in <= 60 iterations.
bool check_termination(std::string& detail) {
  int worst_iters = 0;
  double worst_ratio = 0.0;
  const int ks[] = {1, 2, 3, 5, 8, 13, 21, 34, 50, 50};
  for (int s = 0; s < 20; ++s) {
    const auto sc = model::generate_scenario(500 + s, ks[s % 10]);
    const auto al = opt::minimize_delay(sc, 1e-3);
    const double ratio = al.solver.final_bracket_width / al.total_delay;
    worst_iters = std::max(worst_iters, al.solver.outer_iterations);
    worst_ratio = std::max(worst_ratio, ratio);
    if (al.solver.outer_iterations > 60 || ratio > 1e-3) {
      detail = fmt("seed %g: %g iterations, ratio %.3g", 500.0 + s,
                   double(al.solver.outer_iterations), ratio);
      return false;
    }
  }
  detail = fmt("max iterations %g, max final ratio %.3g", double(worst_iters),
               worst_ratio);
  return true;
}

// 9. Training rounds to global accuracy 1e-2 stay within ceil(a/(1-eta)) on
// noiseless synthetic data with measured (L, gamma), xi = gamma/L, eta = 0.5.
bool check_iteration_bound(std::string& detail) {
  const auto ds = fl::synth_dataset(42, 5, 10, 100, 2.0);
  const fl::LossSpec spec{fl::LossKind::ConvexSquared, 0.0};
  const auto sm = fl::estimate_smoothness(ds, spec);
  if (sm.degenerate) {
    detail = "synthetic dataset unexpectedly degenerate";
    return false;
  }
  fl::TrainConfig cfg;
  cfg.xi = sm.strong_convexity / sm.lipschitz;
  cfg.step = 1.0 / sm.lipschitz;
  cfg.local_iter_coeff =
      2.0 / ((2.0 - sm.lipschitz * cfg.step) * cfg.step * sm.strong_convexity);
  cfg.global_accuracy = 1e-2;
  const double eta = 0.5;
  const double a = 2.0 * sm.lipschitz * sm.lipschitz /
                   (sm.strong_convexity * sm.strong_convexity * cfg.xi) *
                   std::log(1.0 / cfg.global_accuracy);
  const int bound = static_cast<int>(std::ceil(a / (1.0 - eta)));
  const auto log = fl::federated_train(ds, spec, eta, cfg, bound);
  const int rounds = log.rounds.back().round;
  detail = fmt("reached accuracy in %g rounds (bound %g)", double(rounds),
               double(bound));
  return log.reached_accuracy && rounds <= bound;
}

// 10. Convex trajectory monotone nonincreasing over 500 rounds; nonconvex
// trajectory finite with its soft monotonicity result logged.
bool check_loss_trajectory(std::string& detail) {
  const auto ds = fl::synth_dataset(41, 5, 10, 100, 5.0);
  const auto sm = fl::estimate_smoothness(ds, {fl::LossKind::ConvexSquared, 0.0});
  fl::TrainConfig cfg;
  cfg.xi = sm.strong_convexity / sm.lipschitz;
  cfg.step = 1.0 / sm.lipschitz;
  cfg.local_iter_coeff =
      2.0 / ((2.0 - sm.lipschitz * cfg.step) * cfg.step * sm.strong_convexity);
  cfg.global_accuracy = -1.0;  // never stop early

  const auto convex =
      fl::federated_train(ds, {fl::LossKind::ConvexSquared, 0.0}, 0.5, cfg, 500);
  if (convex.rounds.size() != 501) {
    detail = fmt("convex run stopped after %g rounds",
                 double(convex.rounds.size() - 1));
    return false;
  }
  const double floor = 1e-15 * convex.rounds.front().global_loss;
  for (std::size_t i = 1; i < convex.rounds.size(); ++i) {
    const double prev = convex.rounds[i - 1].global_loss;
    const double cur = convex.rounds[i].global_loss;
    if (cur > prev * (1.0 + 1e-9) + floor) {
      detail = fmt("convex loss increased at round %g: %.6g -> %.6g",
                   double(i), prev, cur);
      return false;
    }
  }

  const auto relu = fl::federated_train(
      ds, {fl::LossKind::NonconvexReluSquared, 0.0}, 0.5, cfg, 500);
  bool relu_monotone = true;
  for (std::size_t i = 1; i < relu.rounds.size(); ++i) {
    if (!std::isfinite(relu.rounds[i].global_loss)) {
      detail = fmt("nonconvex loss not finite at round %g", double(i));
      return false;
    }
    if (relu.rounds[i].global_loss >
        relu.rounds[i - 1].global_loss * (1.0 + 1e-9) + floor)
      relu_monotone = false;
  }
  detail = fmt("convex monotone over 500 rounds (final loss %.3g); nonconvex finite",
               convex.rounds.back().global_loss);
  detail += relu_monotone
                ? "; soft monotonicity holds (trajectory constant from the zero start)"
                : "; soft monotonicity does not hold";
  return true;
}

// 11. Analytic gradients vs central finite differences, 100 probes each.
bool check_gradients(std::string& detail) {
  Rng rng(9090);
  const int d = 8, rows = 25;
  auto random_user = [&]() {
    fl::UserData u;
    u.features.resize(rows, d);
    u.targets.resize(rows);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < d; ++c) u.features(r, c) = rng.normal();
      u.targets[r] = rng.normal();
    }
    return u;
  };
  fl::Dataset ds;
  ds.dim = d;
  ds.users.push_back(random_user());
  ds.users.push_back(random_user());
  // Unequal sizes exercise the data-size weighting of the global loss.
  ds.users.push_back([&]() {
    auto u = random_user();
    u.features.conservativeResize(12, d);
    u.targets.conservativeResize(12);
    return u;
  }());

  auto fd_check = [&](const std::function<double(const Eigen::VectorXd&)>& f,
                      const Eigen::VectorXd& grad, const Eigen::VectorXd& at) {
    double worst = 0.0;
    const double h = 1e-6;
    for (int i = 0; i < at.size(); ++i) {
      Eigen::VectorXd hi = at, lo = at;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (f(hi) - f(lo)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad[i]));
    }
    return worst / std::max(1.0, grad.cwiseAbs().maxCoeff());
  };

  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    Eigen::VectorXd w(d), hvec(d);
    for (int i = 0; i < d; ++i) {
      w[i] = rng.normal();
      hvec[i] = rng.normal();
    }
    const fl::LossSpec conv{fl::LossKind::ConvexSquared, probe % 2 ? 0.1 : 0.0};
    const fl::LossSpec relu{fl::LossKind::NonconvexReluSquared, 0.0};
    const auto& u = ds.users[probe % ds.users.size()];

    worst = std::max(
        worst, fd_check([&](const Eigen::VectorXd& x) {
                 return fl::local_loss(x, u, conv);
               }, fl::local_gradient(w, u, conv), w));
    worst = std::max(
        worst, fd_check([&](const Eigen::VectorXd& x) {
                 return fl::local_loss(x, u, relu);
               }, fl::local_gradient(w, u, relu), w));
    worst = std::max(
        worst, fd_check([&](const Eigen::VectorXd& x) {
                 return fl::global_loss(x, ds, conv);
               }, fl::global_gradient(w, ds, conv), w));

    const auto gl = fl::local_gradient(w, u, conv);
    const auto gg = fl::global_gradient(w, ds, conv);
    const auto sur = fl::surrogate_value_and_gradient(w, hvec, gl, gg, 0.37, u, conv);
    worst = std::max(
        worst, fd_check([&](const Eigen::VectorXd& x) {
                 return fl::surrogate_value_and_gradient(w, x, gl, gg, 0.37, u,
                                                         conv)
                     .value;
               }, sur.gradient, hvec));
  }
  detail = fmt("max relative gradient error %.3g (tol 1e-6)", worst);
  return worst <= 1e-6;
}

}  // namespace

std::vector<CheckResult> run_checks(Level level) {
  std::vector<CheckResult> out;
  out.push_back(run_timed("01-lambert-w-roundtrip", check_lambert_roundtrip));
  out.push_back(run_timed("02-rate-inversion-roundtrip", check_rate_inversion));
  out.push_back(run_timed("03-inner-objective-convexity", check_inner_convexity));
  out.push_back(run_timed("11-gradient-check", check_gradients));
  if (level == Level::Full) {
    out.push_back(
        run_timed("04-feasibility-oracle-equivalence", check_feasibility_oracle));
    out.push_back(run_timed("05-end-to-end-optimality", check_end_to_end));
    out.push_back(run_timed("06-scheme-dominance", check_dominance));
    out.push_back(run_timed("07-power-sweep-trend", check_power_trend));
    out.push_back(run_timed("08-bisection-termination", check_termination));
    out.push_back(run_timed("09-iteration-bound", check_iteration_bound));
    out.push_back(run_timed("10-loss-trajectory", check_loss_trajectory));
  }
  std::sort(out.begin(), out.end(),
            [](const CheckResult& a, const CheckResult& b) {
              return a.name < b.name;
            });
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace fldelay::verify
