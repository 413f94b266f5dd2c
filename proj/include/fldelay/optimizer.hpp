#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fldelay/model.hpp"
#include "fldelay/numerics.hpp"

namespace fldelay::opt {

enum class Scheme { Proposed, EbFdma, FeFdma, Tdma };

std::string scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct SolverInfo {
  int outer_iterations = 0;
  double final_bracket_width = 0.0;
  std::optional<numerics::Interval> eta_domain;
  double required_bandwidth = 0.0;  // Hz at the returned (T, eta)
};

/// A full resource allocation: total delay, accuracy, and per-user transmit
/// times, bandwidths, CPU speeds and powers. All quantities SI.
struct Allocation {
  Scheme scheme = Scheme::Proposed;
  double total_delay = 0.0;  // T, s
  double eta = 0.0;
  std::vector<double> transmit_time;   // t_k, s
  std::vector<double> bandwidth;       // b_k, Hz
  std::vector<double> cpu;             // f_k, cycles/s
  std::vector<double> power;           // p_k, W
  std::vector<double> per_user_delay;  // T_k, s
  bool approximate_baseline = false;
  SolverInfo solver;
};

/// Verdict of the fixed-T feasibility test: feasible iff the bandwidth
/// required at the minimizing accuracy eta_star fits the budget.
struct FeasibilityReport {
  bool feasible = false;
  double eta_star = 0.0;           // NaN when the eta domain is empty
  double required_bandwidth = 0.0; // +inf when the eta domain is empty
  std::optional<numerics::Interval> eta_domain;
};

/// Longest admissible transmit time at accuracy eta under delay budget T:
/// (1-eta)*T/a + workload*log2(eta)/f_max. May be <= 0, which marks eta as
/// unusable for this T.
double t_star(double eta, double T, double a, double workload, double f_max);

/// Uplink rate needed to push upload_bits through the t_star window.
/// Throws std::domain_error when the window is closed (t_star <= 0).
double required_rate(double eta, double T, double a, double workload,
                     double f_max, double upload_bits);

/// Inverse of b -> b*log2(1 + g*p_max/(n0*b)): the least bandwidth attaining
/// `rate` at full power, via the W_{-1} branch of Lambert W. rate = 0 maps
/// to 0. Throws std::domain_error at or above the capacity ceiling
/// g*p_max/(n0*ln2), where no finite bandwidth suffices.
double required_bandwidth(double rate, double g, double p_max, double n0);

/// Sum of per-user required bandwidths at (eta, T); +infinity when any user
/// has a closed window or sits at/above its capacity ceiling. Never throws:
/// infeasibility is a value here so outer searches stay total.
double total_required_bandwidth(double eta, double T,
                                const model::Scenario& sc);

/// Maximal open sub-interval of (0,1) on which every user's transmit window
/// is long enough for a below-ceiling rate. Empty when T is too small.
/// Endpoints located by bisection to 1e-10.
std::optional<numerics::Interval> eta_domain(double T,
                                             const model::Scenario& sc);

enum class EtaSearch {
  GoldenSection,      // minimize the convex bandwidth sum directly
  DerivativeBisection // root of sum u_k'(v_k(eta)) v_k'(eta), as in the
                      // stationarity condition
};

struct EtaStar {
  double eta;
  double bandwidth;  // minimized total required bandwidth, Hz
};

/// Minimizer of eta -> total_required_bandwidth(eta, T) over the eta domain,
/// to 1e-8 in eta. Throws std::domain_error when the domain is empty.
EtaStar solve_eta_star(double T, const model::Scenario& sc,
                       EtaSearch method = EtaSearch::GoldenSection);

FeasibilityReport check_feasible(double T, const model::Scenario& sc);

/// Delay that is always attainable: equal bandwidth split, full power and
/// CPU, eta = 1/2.
double t_upper_bound(const model::Scenario& sc);

/// Jointly optimal (T, eta, t, b) by bisection on T over (0, t_upper_bound]
/// with the fixed-T feasibility oracle, then extraction at the final
/// feasible T. rel_tol is the bisection stop (T_hi - T_lo)/T_hi.
Allocation minimize_delay(const model::Scenario& sc, double rel_tol = 1e-3);

/// Equal-bandwidth FDMA baseline: b_k = B/K, transmit at full rate, eta
/// optimized for the resulting fixed transmit times.
Allocation baseline_eb_fdma(const model::Scenario& sc);

/// Fixed-accuracy FDMA baseline: eta = 1/2, T minimized by bisection with
/// the bandwidth-sum feasibility test at eta = 1/2.
Allocation baseline_fe_fdma(const model::Scenario& sc, double rel_tol = 1e-3);

/// Sequential full-band transmission baseline. The round time is
/// max_k tau_k + sum_k t_k; eta optimized. This reconstruction of the TDMA
/// comparison scheme is approximate and the allocation is flagged as such.
Allocation baseline_tdma(const model::Scenario& sc);

/// Invariant audit for an emitted allocation; returns human-readable
/// violations (empty when clean).
std::vector<std::string> allocation_violations(const Allocation& al,
                                               const model::Scenario& sc);

}  // namespace fldelay::opt
