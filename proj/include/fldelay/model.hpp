#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fldelay::model {

/// Per-user physical parameters.
struct UserProfile {
  double cycles_per_sample = 0.0;  // C_k, CPU cycles per data sample
  std::int64_t samples = 0;        // D_k
  double f_max = 0.0;              // maximum CPU speed, cycles/s
  double p_max = 0.0;              // maximum transmit power, W
  double gain = 0.0;               // linear channel power gain g_k
};

struct NetworkConfig {
  double bandwidth = 0.0;    // total uplink bandwidth B, Hz
  double noise_psd = 0.0;    // noise power spectral density N0, W/Hz
  double upload_bits = 0.0;  // model upload size s, bits
};

struct LearningConfig {
  double lipschitz = 1.0;         // L
  double strong_convexity = 1.0;  // gamma
  double xi = 0.1;
  double step = 0.1;              // gradient step delta
  double global_accuracy = 1e-3;  // epsilon_0
};

/// Constants derived from the learning configuration: the number of global
/// rounds is a/(1-eta), the number of local gradient steps is v*log2(1/eta),
/// and the per-round local workload is workload[k] = v*C_k*D_k cycles.
struct DerivedConstants {
  double a = 0.0;
  double v = 0.0;
  std::vector<double> workload;
};

struct Scenario {
  std::vector<UserProfile> users;
  NetworkConfig net;
  LearningConfig learn;
  DerivedConstants derived;
  std::uint64_t seed = 0;
};

/// a = (2L^2/(gamma^2 xi)) ln(1/eps0), v = 2/((2-L delta) delta gamma),
/// workload[k] = v*C_k*D_k. Throws std::domain_error when delta >= 2/L.
DerivedConstants derive_constants(const LearningConfig& learn,
                                  const std::vector<UserProfile>& users);

/// Assembles a scenario and fills in the derived constants.
Scenario make_scenario(std::vector<UserProfile> users, NetworkConfig net,
                       LearningConfig learn, std::uint64_t seed = 0);

/// Soft checks on the learning configuration (xi <= gamma/L, delta < 2/L).
/// Violations do not invalidate the scenario; they void the iteration-count
/// guarantees, so callers should surface them.
std::vector<std::string> scenario_warnings(const Scenario& sc);

/// Hard validation; throws std::invalid_argument naming the offending field.
void validate_scenario(const Scenario& sc);

/// Shannon rate b*log2(1 + g*p/(n0*b)) in bits/s, extended continuously with
/// 0 at b = 0.
double achievable_rate(double b, double p, double g, double n0);

/// Supremum of achievable_rate over b: g*p/(n0*ln2).
double capacity_ceiling(double g, double p, double n0);

/// Local computation time workload*log2(1/eta)/f, seconds.
double local_computation_time(double workload, double f, double eta);

/// Per-user delay a/(1-eta) * (tau + t), seconds.
double user_delay(double a, double eta, double tau, double t);

double dbm_to_watts(double dbm);
double db_to_linear(double db);

/// 128.1 + 37.6 log10(d) dB with d in km; distances are clamped to 1 m.
double path_loss_db(double d_km);

/// Optional replacements for the stock simulation parameters.
struct ScenarioOverrides {
  std::optional<double> p_max_dbm;
  std::optional<double> f_max_hz;
  std::optional<double> bandwidth_hz;
  std::optional<double> upload_bits;
  std::optional<std::int64_t> samples;
  std::optional<double> lipschitz;
  std::optional<double> gamma;
  std::optional<double> xi;
  std::optional<double> delta;
  std::optional<double> epsilon0;
};

/// Random scenario draw: K users uniform in a 500 m x 500 m square with the
/// BS at the center, log-distance path loss with 8 dB log-normal shadowing,
/// C_k uniform in [1e4, 3e4] cycles/sample, and the stock defaults
/// (p_max 10 dBm, f_max 2 GHz, s 28.1 kbit, B 20 MHz, N0 -174 dBm/Hz,
/// D_k 500, L=1, gamma=1, xi=0.1, delta=0.1, eps0=1e-3) unless overridden.
/// Deterministic for a fixed seed.
Scenario generate_scenario(std::uint64_t seed, int k,
                           const ScenarioOverrides& overrides = {});

}  // namespace fldelay::model
