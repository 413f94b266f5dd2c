#include "fldelay/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fldelay/rng.hpp"

namespace fldelay::model {

namespace {

constexpr double kLn2 = 0.6931471805599453;

constexpr double kAreaSideM = 500.0;
constexpr double kShadowStdDb = 8.0;
constexpr double kNoiseDbmPerHz = -174.0;
constexpr double kCyclesLo = 1e4;
constexpr double kCyclesHi = 3e4;
constexpr std::int64_t kSamplesDefault = 500;
constexpr double kFMaxDefault = 2e9;
constexpr double kPMaxDbmDefault = 10.0;
constexpr double kUploadBitsDefault = 28.1e3;
constexpr double kBandwidthDefault = 20e6;

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument("scenario: " + field + " " + why);
}

}  // namespace

DerivedConstants derive_constants(const LearningConfig& learn,
                                  const std::vector<UserProfile>& users) {
  const double L = learn.lipschitz;
  const double g = learn.strong_convexity;
  if (!(L > 0.0) || !(g > 0.0) || !(g <= L))
    throw std::domain_error("derive_constants: requires 0 < gamma <= L");
  if (!(learn.xi > 0.0))
    throw std::domain_error("derive_constants: requires xi > 0");
  if (!(learn.global_accuracy > 0.0) || !(learn.global_accuracy < 1.0))
    throw std::domain_error("derive_constants: requires 0 < epsilon0 < 1");
  if (!(learn.step > 0.0) || !(learn.step < 2.0 / L))
    throw std::domain_error("derive_constants: requires 0 < delta < 2/L");

  DerivedConstants out;
  out.a = 2.0 * L * L / (g * g * learn.xi) * std::log(1.0 / learn.global_accuracy);
  out.v = 2.0 / ((2.0 - L * learn.step) * learn.step * g);
  out.workload.reserve(users.size());
  for (const auto& u : users)
    out.workload.push_back(out.v * u.cycles_per_sample *
                           static_cast<double>(u.samples));
  return out;
}

Scenario make_scenario(std::vector<UserProfile> users, NetworkConfig net,
                       LearningConfig learn, std::uint64_t seed) {
  Scenario sc;
  sc.users = std::move(users);
  sc.net = net;
  sc.learn = learn;
  sc.derived = derive_constants(learn, sc.users);
  sc.seed = seed;
  validate_scenario(sc);
  return sc;
}

std::vector<std::string> scenario_warnings(const Scenario& sc) {
  std::vector<std::string> out;
  const auto& l = sc.learn;
  if (l.xi > l.strong_convexity / l.lipschitz)
    out.push_back(
        "xi exceeds gamma/L; the global iteration bound a/(1-eta) is not "
        "guaranteed");
  if (l.step >= 2.0 / l.lipschitz)
    out.push_back(
        "delta >= 2/L; the local gradient method is not guaranteed to "
        "converge");
  return out;
}

void validate_scenario(const Scenario& sc) {
  require(!sc.users.empty(), "users", "must be nonempty");
  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    const auto& u = sc.users[k];
    const std::string at = "users[" + std::to_string(k) + "].";
    require(u.cycles_per_sample > 0.0, at + "c_cycles_per_sample",
            "must be positive");
    require(u.samples >= 1, at + "d_samples", "must be >= 1");
    require(u.f_max > 0.0, at + "f_max_hz", "must be positive");
    require(u.p_max > 0.0, at + "p_max_w", "must be positive");
    require(u.gain > 0.0, at + "gain_linear", "must be positive");
  }
  require(sc.net.bandwidth > 0.0, "network.bandwidth_hz", "must be positive");
  require(sc.net.noise_psd > 0.0, "network.noise_psd_w_per_hz",
          "must be positive");
  require(sc.net.upload_bits > 0.0, "network.upload_bits", "must be positive");

  const auto derived = derive_constants(sc.learn, sc.users);
  require(derived.a == sc.derived.a && derived.v == sc.derived.v &&
              derived.workload == sc.derived.workload,
          "derived", "is inconsistent with the learning configuration");
}

double achievable_rate(double b, double p, double g, double n0) {
  if (b <= 0.0 || p <= 0.0) return 0.0;
  return b * std::log1p(g * p / (n0 * b)) / kLn2;
}

double capacity_ceiling(double g, double p, double n0) {
  return g * p / (n0 * kLn2);
}

double local_computation_time(double workload, double f, double eta) {
  if (!(eta > 0.0) || !(eta <= 1.0))
    throw std::domain_error("local_computation_time: requires 0 < eta <= 1");
  if (!(f > 0.0))
    throw std::domain_error("local_computation_time: requires f > 0");
  return workload * std::log2(1.0 / eta) / f;
}

double user_delay(double a, double eta, double tau, double t) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::domain_error("user_delay: requires 0 < eta < 1");
  return a / (1.0 - eta) * (tau + t);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double path_loss_db(double d_km) {
  const double d = std::max(d_km, 1e-3);  // clamp below 1 m
  return 128.1 + 37.6 * std::log10(d);
}

Scenario generate_scenario(std::uint64_t seed, int k,
                           const ScenarioOverrides& ov) {
  if (k < 1)
    throw std::invalid_argument("generate_scenario: requires k >= 1");

  Rng rng(seed);
  const double p_max = dbm_to_watts(ov.p_max_dbm.value_or(kPMaxDbmDefault));
  const double f_max = ov.f_max_hz.value_or(kFMaxDefault);
  const std::int64_t samples = ov.samples.value_or(kSamplesDefault);

  std::vector<UserProfile> users;
  users.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double x = rng.uniform(-kAreaSideM / 2, kAreaSideM / 2);
    const double y = rng.uniform(-kAreaSideM / 2, kAreaSideM / 2);
    const double shadow_db = kShadowStdDb * rng.normal();
    const double cycles = rng.uniform(kCyclesLo, kCyclesHi);

    const double d_km = std::hypot(x, y) / 1000.0;
    const double pl_db = path_loss_db(d_km) + shadow_db;

    UserProfile u;
    u.cycles_per_sample = cycles;
    u.samples = samples;
    u.f_max = f_max;
    u.p_max = p_max;
    u.gain = db_to_linear(-pl_db);
    users.push_back(u);
  }

  NetworkConfig net;
  net.bandwidth = ov.bandwidth_hz.value_or(kBandwidthDefault);
  net.noise_psd = dbm_to_watts(kNoiseDbmPerHz);
  net.upload_bits = ov.upload_bits.value_or(kUploadBitsDefault);

  LearningConfig learn;
  learn.lipschitz = ov.lipschitz.value_or(1.0);
  learn.strong_convexity = ov.gamma.value_or(1.0);
  learn.xi = ov.xi.value_or(0.1);
  learn.step = ov.delta.value_or(0.1);
  learn.global_accuracy = ov.epsilon0.value_or(1e-3);

  return make_scenario(std::move(users), net, learn, seed);
}

}  // namespace fldelay::model
