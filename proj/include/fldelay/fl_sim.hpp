#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fldelay::fl {

struct UserData {
  Eigen::MatrixXd features;  // D_k x d
  Eigen::VectorXd targets;   // D_k
};

struct Dataset {
  std::vector<UserData> users;
  Eigen::Index dim = 0;
  // Loss at the optimum of the ridge-free convex problem, when known
  // (0 for noiseless synthetic data). Enables the accuracy-ratio bookkeeping.
  std::optional<double> optimal_loss;
};

enum class LossKind {
  ConvexSquared,         // 1/2 (x'w - y)^2
  NonconvexReluSquared,  // 1/2 (max{x'w, 0} - y)^2
};

struct LossSpec {
  LossKind kind = LossKind::ConvexSquared;
  double ridge = 0.0;  // lambda; adds lambda/2 ||w||^2 to every local loss
};

double local_loss(const Eigen::VectorXd& w, const UserData& data,
                  const LossSpec& spec);
Eigen::VectorXd local_gradient(const Eigen::VectorXd& w, const UserData& data,
                               const LossSpec& spec);

/// Data-size-weighted average of the local losses.
double global_loss(const Eigen::VectorXd& w, const Dataset& ds,
                   const LossSpec& spec);

/// Exact gradient of global_loss (data-size weighted).
Eigen::VectorXd global_gradient(const Eigen::VectorXd& w, const Dataset& ds,
                                const LossSpec& spec);

/// Uniform 1/K gradient average, matching the server-side aggregation step.
/// Coincides with global_gradient when all users hold equally many samples.
Eigen::VectorXd global_gradient_uniform(const Eigen::VectorXd& w,
                                        const Dataset& ds,
                                        const LossSpec& spec);

struct SurrogateEval {
  double value;
  Eigen::VectorXd gradient;
};

/// Gradient-corrected local objective
///   G(w, h) = F_k(w + h) - (grad F_k(w) - xi grad F(w))' h
/// and its exact h-gradient grad F_k(w+h) - grad F_k(w) + xi grad F(w).
SurrogateEval surrogate_value_and_gradient(const Eigen::VectorXd& w,
                                           const Eigen::VectorXd& h,
                                           const Eigen::VectorXd& grad_local_at_w,
                                           const Eigen::VectorXd& grad_global_at_w,
                                           double xi, const UserData& data,
                                           const LossSpec& spec);

struct TrainConfig {
  double xi = 0.1;
  double step = 0.1;              // delta
  double local_iter_coeff = 0.0;  // v; local steps per round = ceil(v*log2(1/eta))
  double global_accuracy = 1e-3;  // epsilon_0 stopping target
};

/// Runs exactly ceil(v*log2(1/eta)) gradient steps on the surrogate from
/// h = 0 and returns the final h. Throws std::runtime_error if the surrogate
/// value blows up (step-size misconfiguration).
Eigen::VectorXd local_solve(const Eigen::VectorXd& w,
                            const Eigen::VectorXd& grad_global, double eta,
                            const UserData& data, const LossSpec& spec,
                            const TrainConfig& cfg);

struct RoundRecord {
  int round;
  double global_loss;
  std::optional<double> accuracy_ratio;  // (F(w)-F*)/(F(w0)-F*) when F* known
  int local_iters;
};

struct TrainLog {
  std::vector<RoundRecord> rounds;  // entry 0 is the initial state
  bool reached_accuracy = false;
};

/// Federated training rounds: gradient exchange, per-user surrogate descent,
/// uniform aggregation w <- w + (1/K) sum h_k. Starts from w = 0 and stops at
/// the accuracy target when the optimum is known, on loss stagnation when it
/// is not, or after max_rounds.
TrainLog federated_train(const Dataset& ds, const LossSpec& spec, double eta,
                         const TrainConfig& cfg, int max_rounds);

struct Smoothness {
  double lipschitz;
  double strong_convexity;
  bool degenerate;  // some per-user Hessian is (numerically) singular
};

/// Spectral extremes of the per-user Hessians (1/D_k) X'X + ridge I via
/// power iteration to 1e-8 relative. ConvexSquared only.
Smoothness estimate_smoothness(const Dataset& ds, const LossSpec& spec);

/// Synthetic regression data with a prescribed global condition number:
/// per-user features are scaled orthogonal designs sharing the spectrum
/// [1, condition_number], targets come from a planted weight vector plus
/// optional Gaussian noise. Requires samples_per_user >= dim.
Dataset synth_dataset(std::uint64_t seed, int k, int dim, int samples_per_user,
                      double condition_number, double noise_std = 0.0);

struct CsvData {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
};

/// Strict numeric CSV, last column the target. Throws std::runtime_error
/// with row/column context on malformed input (including header rows).
CsvData load_csv(const std::string& path);

/// Draws k*samples_per_user distinct rows (seeded) and deals them out to k
/// users in order.
Dataset partition_users(const CsvData& data, int k, int samples_per_user,
                        std::uint64_t seed);

}  // namespace fldelay::fl
