#include "fldelay/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fldelay::opt {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEtaEdge = 1e-12;  // generic open-interval clearance on eta

// Shortest transmit window that still admits a below-ceiling rate.
double min_window(const model::UserProfile& u, const model::NetworkConfig& net) {
  return net.upload_bits / model::capacity_ceiling(u.gain, u.p_max, net.noise_psd);
}

double tstar_derivative(double eta, double T, double a, double workload,
                        double f_max) {
  return -T / a + workload / (f_max * kLn2 * eta);
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::EbFdma: return "eb-fdma";
    case Scheme::FeFdma: return "fe-fdma";
    case Scheme::Tdma: return "tdma";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
  if (name == "proposed") return Scheme::Proposed;
  if (name == "eb-fdma") return Scheme::EbFdma;
  if (name == "fe-fdma") return Scheme::FeFdma;
  if (name == "tdma") return Scheme::Tdma;
  return std::nullopt;
}

double t_star(double eta, double T, double a, double workload, double f_max) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::domain_error("t_star: requires 0 < eta < 1");
  return (1.0 - eta) * T / a + workload * std::log2(eta) / f_max;
}

double required_rate(double eta, double T, double a, double workload,
                     double f_max, double upload_bits) {
  const double t = t_star(eta, T, a, workload, f_max);
  if (!(t > 0.0))
    throw std::domain_error(
        "required_rate: computation alone exhausts the delay budget");
  return upload_bits / t;
}

double required_bandwidth(double rate, double g, double p_max, double n0) {
  if (rate == 0.0) return 0.0;
  if (!(rate > 0.0))
    throw std::domain_error("required_bandwidth: rate must be nonnegative");
  const double m = kLn2 * n0 * rate / (g * p_max);
  if (m >= 1.0)
    throw std::domain_error(
        "required_bandwidth: rate at or above the capacity ceiling");
  // -m e^{-m} >= -1/e holds exactly; the clamp only repairs rounding for m
  // within a few ulp of 1, where the product can dip below the branch point.
  const double arg = std::max(-m * std::exp(-m), -std::exp(-1.0));
  const double w = numerics::lambert_w_m1(arg);
  return -kLn2 * rate / (w + m);
}

double total_required_bandwidth(double eta, double T,
                                const model::Scenario& sc) {
  if (!(eta > 0.0) || !(eta < 1.0) || !(T > 0.0)) return kInf;
  double sum = 0.0;
  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    const auto& u = sc.users[k];
    const double t =
        t_star(eta, T, sc.derived.a, sc.derived.workload[k], u.f_max);
    if (!(t > 0.0)) return kInf;
    const double rate = sc.net.upload_bits / t;
    const double m = kLn2 * sc.net.noise_psd * rate / (u.gain * u.p_max);
    if (m >= 1.0) return kInf;
    sum += required_bandwidth(rate, u.gain, u.p_max, sc.net.noise_psd);
  }
  return sum;
}

std::optional<numerics::Interval> eta_domain(double T,
                                             const model::Scenario& sc) {
  if (!(T > 0.0)) return std::nullopt;
  const double a = sc.derived.a;
  double lo = 0.0;
  double hi = 1.0;
  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    const auto& u = sc.users[k];
    const double A = sc.derived.workload[k];
    const double theta = min_window(u, sc.net);
    // Same expression as t_star but valid at eta = 1, where it is exactly 0.
    auto margin = [&](double eta) {
      return (1.0 - eta) * T / a + A * std::log2(eta) / u.f_max - theta;
    };

    // t_star is concave in eta with a single interior peak; the admissible
    // set {margin > 0} is an interval around it.
    double peak = a * A / (T * u.f_max * kLn2);
    if (peak >= 1.0) return std::nullopt;  // window closed on all of (0,1)
    peak = std::max(peak, 1e-300);
    if (!(margin(peak) > 0.0)) return std::nullopt;

    double left = 1e-300;
    if (!(margin(left) >= 0.0))
      left = numerics::bisect_root(margin, numerics::Interval(left, peak),
                                   1e-10);
    const double right =
        numerics::bisect_root(margin, numerics::Interval(peak, 1.0), 1e-10);
    lo = std::max(lo, left);
    hi = std::min(hi, right);
    if (!(lo < hi)) return std::nullopt;
  }
  return numerics::Interval(lo, hi);
}

EtaStar solve_eta_star(double T, const model::Scenario& sc, EtaSearch method) {
  const auto dom = eta_domain(T, sc);
  if (!dom) throw std::domain_error("solve_eta_star: empty eta domain");

  // Capped objective keeps the search total; the cap only binds at the very
  // edges of the domain where the true sum diverges.
  auto objective = [&](double eta) {
    return std::min(total_required_bandwidth(eta, T, sc), 1e300);
  };

  if (method == EtaSearch::GoldenSection) {
    const auto res = numerics::minimize_convex_1d(objective, *dom, 1e-8);
    return {res.x, total_required_bandwidth(res.x, T, sc)};
  }

  // Stationarity route: the summed derivative d/deta u_k(v_k(eta)) is
  // increasing (convexity), negative near the lower domain edge and positive
  // near the upper one. u_k'(rate) = 1/z_k'(b) at b = u_k(rate).
  auto derivative = [&](double eta) {
    double sum = 0.0;
    for (std::size_t k = 0; k < sc.users.size(); ++k) {
      const auto& u = sc.users[k];
      const double A = sc.derived.workload[k];
      const double t = t_star(eta, T, sc.derived.a, A, u.f_max);
      const double tp = tstar_derivative(eta, T, sc.derived.a, A, u.f_max);
      const double rate = sc.net.upload_bits / t;
      const double rate_p = -sc.net.upload_bits * tp / (t * t);
      const double b = required_bandwidth(rate, u.gain, u.p_max, sc.net.noise_psd);
      const double c = u.gain * u.p_max / sc.net.noise_psd;  // Hz
      const double zp =
          std::log2(1.0 + c / b) - (c / b) / ((1.0 + c / b) * kLn2);
      sum += rate_p / zp;
    }
    return sum;
  };

  const double margin = std::max(1e-13, 1e-9 * dom->width());
  if (dom->width() <= 3.0 * margin)
    return {dom->mid(), total_required_bandwidth(dom->mid(), T, sc)};
  const numerics::Interval inner(dom->lo + margin, dom->hi - margin);
  double eta;
  if (derivative(inner.lo) > 0.0) {
    eta = inner.lo;  // minimum pinned to the lower edge
  } else if (derivative(inner.hi) < 0.0) {
    eta = inner.hi;
  } else {
    eta = numerics::bisect_root(derivative, inner, 1e-10);
  }
  return {eta, total_required_bandwidth(eta, T, sc)};
}

FeasibilityReport check_feasible(double T, const model::Scenario& sc) {
  FeasibilityReport rep;
  rep.eta_domain = eta_domain(T, sc);
  if (!rep.eta_domain) {
    rep.feasible = false;
    rep.eta_star = std::numeric_limits<double>::quiet_NaN();
    rep.required_bandwidth = kInf;
    return rep;
  }
  const auto es = solve_eta_star(T, sc);
  rep.eta_star = es.eta;
  rep.required_bandwidth = es.bandwidth;
  rep.feasible = es.bandwidth <= sc.net.bandwidth;
  return rep;
}

double t_upper_bound(const model::Scenario& sc) {
  const double a = sc.derived.a;
  const double K = static_cast<double>(sc.users.size());
  const double B = sc.net.bandwidth;
  double worst = 0.0;
  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    const auto& u = sc.users[k];
    const double compute = 2.0 * a * sc.derived.workload[k] / u.f_max;
    const double snr = u.gain * u.p_max * K / (sc.net.noise_psd * B);
    const double transmit =
        2.0 * a * K * sc.net.upload_bits / (B * std::log2(1.0 + snr));
    worst = std::max(worst, compute + transmit);
  }
  return worst;
}

namespace {

Allocation extract_fdma(Scheme scheme, double T, double eta,
                        const model::Scenario& sc,
                        const numerics::ThresholdResult& thr,
                        std::optional<numerics::Interval> dom) {
  Allocation al;
  al.scheme = scheme;
  al.total_delay = T;
  al.eta = eta;
  const std::size_t K = sc.users.size();
  al.transmit_time.resize(K);
  al.bandwidth.resize(K);
  al.cpu.resize(K);
  al.power.resize(K);
  al.per_user_delay.resize(K);
  double breq = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& u = sc.users[k];
    const double A = sc.derived.workload[k];
    const double t = t_star(eta, T, sc.derived.a, A, u.f_max);
    const double rate = sc.net.upload_bits / t;
    al.transmit_time[k] = t;
    al.bandwidth[k] =
        required_bandwidth(rate, u.gain, u.p_max, sc.net.noise_psd);
    al.cpu[k] = u.f_max;
    al.power[k] = u.p_max;
    const double tau = model::local_computation_time(A, u.f_max, eta);
    al.per_user_delay[k] = model::user_delay(sc.derived.a, eta, tau, t);
    breq += al.bandwidth[k];
  }
  al.solver.outer_iterations = thr.iterations;
  al.solver.final_bracket_width = thr.final_width;
  al.solver.eta_domain = dom;
  al.solver.required_bandwidth = breq;
  return al;
}

}  // namespace

Allocation minimize_delay(const model::Scenario& sc, double rel_tol) {
  const double t_hi = t_upper_bound(sc) * (1.0 + 1e-6);
  const auto thr = numerics::bisect_threshold_full(
      [&](double T) { return check_feasible(T, sc).feasible; },
      numerics::Interval(0.0, t_hi), rel_tol);
  const double T = thr.value;
  const auto es = solve_eta_star(T, sc);
  return extract_fdma(Scheme::Proposed, T, es.eta, sc, thr, eta_domain(T, sc));
}

Allocation baseline_eb_fdma(const model::Scenario& sc) {
  const std::size_t K = sc.users.size();
  const double share = sc.net.bandwidth / static_cast<double>(K);

  std::vector<double> t(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& u = sc.users[k];
    t[k] = sc.net.upload_bits /
           model::achievable_rate(share, u.p_max, u.gain, sc.net.noise_psd);
  }
  auto delay_at = [&](double eta) {
    double worst = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& u = sc.users[k];
      const double tau =
          model::local_computation_time(sc.derived.workload[k], u.f_max, eta);
      worst = std::max(worst, model::user_delay(sc.derived.a, eta, tau, t[k]));
    }
    return worst;
  };
  const auto res = numerics::minimize_convex_1d(
      delay_at, numerics::Interval(kEtaEdge, 1.0 - kEtaEdge), 1e-10);

  Allocation al;
  al.scheme = Scheme::EbFdma;
  al.total_delay = res.value;
  al.eta = res.x;
  al.transmit_time = t;
  al.bandwidth.assign(K, share);
  al.cpu.resize(K);
  al.power.resize(K);
  al.per_user_delay.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& u = sc.users[k];
    al.cpu[k] = u.f_max;
    al.power[k] = u.p_max;
    const double tau =
        model::local_computation_time(sc.derived.workload[k], u.f_max, res.x);
    al.per_user_delay[k] = model::user_delay(sc.derived.a, res.x, tau, t[k]);
  }
  al.solver.required_bandwidth = sc.net.bandwidth;
  return al;
}

Allocation baseline_fe_fdma(const model::Scenario& sc, double rel_tol) {
  const double eta = 0.5;
  const double t_hi = t_upper_bound(sc) * (1.0 + 1e-6);
  const auto thr = numerics::bisect_threshold_full(
      [&](double T) {
        return total_required_bandwidth(eta, T, sc) <= sc.net.bandwidth;
      },
      numerics::Interval(0.0, t_hi), rel_tol);
  return extract_fdma(Scheme::FeFdma, thr.value, eta, sc, thr,
                      eta_domain(thr.value, sc));
}

Allocation baseline_tdma(const model::Scenario& sc) {
  const std::size_t K = sc.users.size();
  std::vector<double> t(K);
  double t_sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& u = sc.users[k];
    t[k] = sc.net.upload_bits / model::achievable_rate(sc.net.bandwidth,
                                                       u.p_max, u.gain,
                                                       sc.net.noise_psd);
    t_sum += t[k];
  }
  auto delay_at = [&](double eta) {
    double tau_max = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      tau_max = std::max(tau_max,
                         model::local_computation_time(sc.derived.workload[k],
                                                       sc.users[k].f_max, eta));
    return sc.derived.a / (1.0 - eta) * (tau_max + t_sum);
  };
  const auto res = numerics::minimize_convex_1d(
      delay_at, numerics::Interval(kEtaEdge, 1.0 - kEtaEdge), 1e-10);

  Allocation al;
  al.scheme = Scheme::Tdma;
  al.approximate_baseline = true;
  al.total_delay = res.value;
  al.eta = res.x;
  al.transmit_time = t;
  al.bandwidth.assign(K, sc.net.bandwidth);
  al.cpu.resize(K);
  al.power.resize(K);
  al.per_user_delay.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& u = sc.users[k];
    al.cpu[k] = u.f_max;
    al.power[k] = u.p_max;
    const double tau =
        model::local_computation_time(sc.derived.workload[k], u.f_max, res.x);
    al.per_user_delay[k] = model::user_delay(sc.derived.a, res.x, tau, t[k]);
  }
  al.solver.required_bandwidth = sc.net.bandwidth;
  return al;
}

std::vector<std::string> allocation_violations(const Allocation& al,
                                               const model::Scenario& sc) {
  std::vector<std::string> out;
  const std::size_t K = sc.users.size();
  auto fail = [&](const std::string& msg) { out.push_back(msg); };

  if (!(al.eta > 0.0 && al.eta < 1.0)) fail("eta outside (0,1)");
  if (al.transmit_time.size() != K || al.bandwidth.size() != K ||
      al.cpu.size() != K || al.power.size() != K ||
      al.per_user_delay.size() != K) {
    fail("per-user vectors do not match the user count");
    return out;
  }

  double b_sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& u = sc.users[k];
    const std::string at = "user " + std::to_string(k) + ": ";
    if (!(std::isfinite(al.transmit_time[k]) && al.transmit_time[k] >= 0.0))
      fail(at + "transmit time not finite/nonnegative");
    if (!(std::isfinite(al.bandwidth[k]) && al.bandwidth[k] >= 0.0))
      fail(at + "bandwidth not finite/nonnegative");
    if (al.cpu[k] > u.f_max * (1.0 + 1e-12)) fail(at + "cpu above f_max");
    if (al.power[k] > u.p_max * (1.0 + 1e-12)) fail(at + "power above p_max");
    if (al.per_user_delay[k] > al.total_delay * (1.0 + 1e-9))
      fail(at + "per-user delay above total");
    const double rate = model::achievable_rate(al.bandwidth[k], al.power[k],
                                               u.gain, sc.net.noise_psd);
    if (al.transmit_time[k] * rate < sc.net.upload_bits * (1.0 - 1e-9))
      fail(at + "upload does not fit in the transmit window");
    b_sum += al.bandwidth[k];
  }
  if (al.scheme == Scheme::Tdma) {
    for (std::size_t k = 0; k < K; ++k)
      if (al.bandwidth[k] > sc.net.bandwidth * (1.0 + 1e-9))
        fail("user " + std::to_string(k) + ": bandwidth above B");
  } else if (b_sum > sc.net.bandwidth * (1.0 + 1e-9)) {
    fail("bandwidth sum above B");
  }
  return out;
}

}  // namespace fldelay::opt
