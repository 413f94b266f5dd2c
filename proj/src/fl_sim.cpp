#include "fldelay/fl_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fldelay/rng.hpp"

namespace fldelay::fl {

namespace {

double total_samples(const Dataset& ds) {
  double n = 0.0;
  for (const auto& u : ds.users) n += static_cast<double>(u.features.rows());
  return n;
}

// Residual max(x'w, 0) - y with the zero subgradient convention at the kink.
void relu_residual(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                   Eigen::VectorXd& resid, Eigen::VectorXd& active) {
  resid = z.cwiseMax(0.0) - y;
  active = (z.array() > 0.0).cast<double>();
}

int local_iteration_count(double eta, const TrainConfig& cfg) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::domain_error("local_solve: requires 0 < eta < 1");
  return static_cast<int>(std::ceil(cfg.local_iter_coeff * std::log2(1.0 / eta)));
}

}  // namespace

double local_loss(const Eigen::VectorXd& w, const UserData& data,
                  const LossSpec& spec) {
  const Eigen::VectorXd z = data.features * w;
  double sum;
  if (spec.kind == LossKind::ConvexSquared) {
    sum = 0.5 * (z - data.targets).squaredNorm();
  } else {
    sum = 0.5 * (z.cwiseMax(0.0) - data.targets).squaredNorm();
  }
  return sum / static_cast<double>(data.features.rows()) +
         0.5 * spec.ridge * w.squaredNorm();
}

Eigen::VectorXd local_gradient(const Eigen::VectorXd& w, const UserData& data,
                               const LossSpec& spec) {
  const Eigen::VectorXd z = data.features * w;
  Eigen::VectorXd g;
  if (spec.kind == LossKind::ConvexSquared) {
    g = data.features.transpose() * (z - data.targets);
  } else {
    Eigen::VectorXd resid, active;
    relu_residual(z, data.targets, resid, active);
    g = data.features.transpose() * resid.cwiseProduct(active);
  }
  g /= static_cast<double>(data.features.rows());
  if (spec.ridge != 0.0) g += spec.ridge * w;
  return g;
}

double global_loss(const Eigen::VectorXd& w, const Dataset& ds,
                   const LossSpec& spec) {
  if (ds.users.empty()) throw std::invalid_argument("global_loss: empty dataset");
  const double D = total_samples(ds);
  double out = 0.0;
  for (const auto& u : ds.users)
    out += static_cast<double>(u.features.rows()) / D * local_loss(w, u, spec);
  return out;
}

Eigen::VectorXd global_gradient(const Eigen::VectorXd& w, const Dataset& ds,
                                const LossSpec& spec) {
  const double D = total_samples(ds);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (const auto& u : ds.users)
    g += static_cast<double>(u.features.rows()) / D *
         local_gradient(w, u, spec);
  return g;
}

Eigen::VectorXd global_gradient_uniform(const Eigen::VectorXd& w,
                                        const Dataset& ds,
                                        const LossSpec& spec) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (const auto& u : ds.users) g += local_gradient(w, u, spec);
  return g / static_cast<double>(ds.users.size());
}

SurrogateEval surrogate_value_and_gradient(
    const Eigen::VectorXd& w, const Eigen::VectorXd& h,
    const Eigen::VectorXd& grad_local_at_w,
    const Eigen::VectorXd& grad_global_at_w, double xi, const UserData& data,
    const LossSpec& spec) {
  const Eigen::VectorXd correction = grad_local_at_w - xi * grad_global_at_w;
  SurrogateEval out;
  out.value = local_loss(w + h, data, spec) - correction.dot(h);
  out.gradient = local_gradient(w + h, data, spec) - correction;
  return out;
}

Eigen::VectorXd local_solve(const Eigen::VectorXd& w,
                            const Eigen::VectorXd& grad_global, double eta,
                            const UserData& data, const LossSpec& spec,
                            const TrainConfig& cfg) {
  const int iters = local_iteration_count(eta, cfg);
  const Eigen::VectorXd grad_local = local_gradient(w, data, spec);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(w.size());

  const double g0 = local_loss(w, data, spec);  // G(w, 0)
  double prev = g0;
  for (int i = 0; i < iters; ++i) {
    const auto eval = surrogate_value_and_gradient(w, h, grad_local,
                                                   grad_global, cfg.xi, data,
                                                   spec);
    if (eval.value > prev &&
        eval.value - g0 > 1e6 * std::max(1.0, std::abs(g0)))
      throw std::runtime_error(
          "local_solve: surrogate value diverged (check the step size)");
    h -= cfg.step * eval.gradient;
    prev = eval.value;
  }
  return h;
}

TrainLog federated_train(const Dataset& ds, const LossSpec& spec, double eta,
                         const TrainConfig& cfg, int max_rounds) {
  const int K = static_cast<int>(ds.users.size());
  if (K == 0) throw std::invalid_argument("federated_train: empty dataset");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(ds.dim);

  // The recorded optimum describes the ridge-free convex problem only.
  const bool have_optimum = spec.kind == LossKind::ConvexSquared &&
                            spec.ridge == 0.0 && ds.optimal_loss.has_value();
  const double f_star = have_optimum ? *ds.optimal_loss : 0.0;
  const double f0 = global_loss(w, ds, spec);
  const double gap0 = f0 - f_star;
  auto ratio_of = [&](double f) -> std::optional<double> {
    if (!have_optimum) return std::nullopt;
    if (gap0 <= 0.0) return 0.0;  // started at the optimum
    return (f - f_star) / gap0;
  };

  TrainLog log;
  log.rounds.push_back({0, f0, ratio_of(f0), 0});

  const int local_iters = local_iteration_count(eta, cfg);
  double prev_loss = f0;
  for (int n = 1; n <= max_rounds; ++n) {
    const Eigen::VectorXd grad_global = global_gradient_uniform(w, ds, spec);
    Eigen::VectorXd h_sum = Eigen::VectorXd::Zero(ds.dim);
    for (const auto& u : ds.users)  // fixed-order reduction
      h_sum += local_solve(w, grad_global, eta, u, spec, cfg);
    w += h_sum / static_cast<double>(K);

    const double f = global_loss(w, ds, spec);
    const auto ratio = ratio_of(f);
    log.rounds.push_back({n, f, ratio, local_iters});

    if (ratio && *ratio <= cfg.global_accuracy) {
      log.reached_accuracy = true;
      break;
    }
    if (!have_optimum &&
        std::abs(f - prev_loss) <= 1e-9 * std::max(1.0, std::abs(prev_loss)))
      break;
    prev_loss = f;
  }
  return log;
}

Smoothness estimate_smoothness(const Dataset& ds, const LossSpec& spec) {
  if (spec.kind != LossKind::ConvexSquared)
    throw std::domain_error(
        "estimate_smoothness: only the convex squared loss has gamma > 0");
  if (ds.users.empty())
    throw std::invalid_argument("estimate_smoothness: empty dataset");

  // Deterministic non-degenerate start vector for the power iterations.
  const auto start_vector = [](Eigen::Index d) {
    Rng rng(0x9e3779b97f4a7c15ULL);
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
    v.normalize();
    return v;
  };

  auto top_eigenvalue = [&](const Eigen::MatrixXd& h) {
    Eigen::VectorXd v = start_vector(h.rows());
    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
      Eigen::VectorXd hv = h * v;
      const double norm = hv.norm();
      if (norm == 0.0) return 0.0;
      v = hv / norm;
      const double next = v.dot(h * v);
      if (std::abs(next - lambda) <= 1e-8 * std::max(1.0, std::abs(next))) {
        return next;
      }
      lambda = next;
    }
    return lambda;
  };

  double L = 0.0;
  double gamma = std::numeric_limits<double>::infinity();
  bool degenerate = false;
  for (const auto& u : ds.users) {
    const double dk = static_cast<double>(u.features.rows());
    Eigen::MatrixXd h = u.features.transpose() * u.features / dk;
    if (spec.ridge != 0.0)
      h += spec.ridge * Eigen::MatrixXd::Identity(h.rows(), h.cols());

    const double lmax = top_eigenvalue(h);
    // Spectral shift: the top eigenvalue of sigma*I - H is sigma - lambda_min.
    const double sigma = lmax * (1.0 + 1e-3) + 1e-12;
    const Eigen::MatrixXd shifted =
        sigma * Eigen::MatrixXd::Identity(h.rows(), h.cols()) - h;
    double lmin = sigma - top_eigenvalue(shifted);
    // The iteration stops at 1e-8 relative, so anything below ~1e-7*sigma is
    // indistinguishable from a singular direction; report it as exactly 0.
    if (lmin < 1e-7 * sigma) {
      lmin = 0.0;
      degenerate = true;
    }
    L = std::max(L, lmax);
    gamma = std::min(gamma, lmin);
  }
  if (gamma < 0.0) gamma = 0.0;
  return {L, gamma, degenerate};
}

Dataset synth_dataset(std::uint64_t seed, int k, int dim, int samples_per_user,
                      double condition_number, double noise_std) {
  if (k < 1 || dim < 1) throw std::invalid_argument("synth_dataset: k, dim >= 1");
  if (samples_per_user < dim)
    throw std::invalid_argument(
        "synth_dataset: needs samples_per_user >= dim for a full-rank design");
  if (!(condition_number >= 1.0))
    throw std::invalid_argument("synth_dataset: condition_number >= 1");

  Rng rng(seed);
  Eigen::VectorXd spectrum(dim);
  for (int i = 0; i < dim; ++i)
    spectrum[i] = dim == 1 ? 1.0
                           : 1.0 + (condition_number - 1.0) * i / (dim - 1.0);

  Eigen::VectorXd w_true(dim);
  for (int i = 0; i < dim; ++i) w_true[i] = rng.normal();
  w_true /= std::sqrt(static_cast<double>(dim));

  Dataset ds;
  ds.dim = dim;
  ds.users.reserve(static_cast<std::size_t>(k));
  for (int u = 0; u < k; ++u) {
    Eigen::MatrixXd gauss(samples_per_user, dim);
    for (int r = 0; r < samples_per_user; ++r)
      for (int c = 0; c < dim; ++c) gauss(r, c) = rng.normal();
    // Thin orthonormal factor; scaling makes (1/D) X'X equal the target
    // spectrum exactly (up to rounding).
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    const Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(samples_per_user, dim);
    Eigen::MatrixXd x = std::sqrt(static_cast<double>(samples_per_user)) * q *
                        spectrum.cwiseSqrt().asDiagonal();

    Eigen::VectorXd y = x * w_true;
    if (noise_std > 0.0)
      for (int r = 0; r < samples_per_user; ++r) y[r] += noise_std * rng.normal();
    ds.users.push_back({std::move(x), std::move(y)});
  }
  if (noise_std == 0.0) ds.optimal_loss = 0.0;
  return ds;
}

CsvData load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("load_csv: cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    int col = 0;
    while (true) {
      ++col;
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(value);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: " + path + ": line " +
                                 std::to_string(line_no) + ", column " +
                                 std::to_string(col) + ": not a number: '" +
                                 cell + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(
          "load_csv: " + path + ": line " + std::to_string(line_no) + ": has " +
          std::to_string(row.size()) + " columns, expected " +
          std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: " + path + ": empty file");
  if (rows.front().size() < 2)
    throw std::runtime_error("load_csv: " + path +
                             ": needs at least one feature column plus the "
                             "target column");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows.front().size()) - 1;
  CsvData out;
  out.features.resize(n, d);
  out.targets.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) out.features(r, c) = rows[r][c];
    out.targets[r] = rows[r][d];
  }
  return out;
}

Dataset partition_users(const CsvData& data, int k, int samples_per_user,
                        std::uint64_t seed) {
  if (k < 1 || samples_per_user < 1)
    throw std::invalid_argument("partition_users: k, samples_per_user >= 1");
  const Eigen::Index need = static_cast<Eigen::Index>(k) * samples_per_user;
  if (need > data.features.rows())
    throw std::invalid_argument(
        "partition_users: dataset has " + std::to_string(data.features.rows()) +
        " rows, need " + std::to_string(need));

  // Partial Fisher-Yates draw of `need` distinct row indices.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(data.features.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < need; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           rng.uniform() * static_cast<double>(idx.size() - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }

  Dataset ds;
  ds.dim = data.features.cols();
  ds.users.reserve(static_cast<std::size_t>(k));
  for (int u = 0; u < k; ++u) {
    UserData ud;
    ud.features.resize(samples_per_user, ds.dim);
    ud.targets.resize(samples_per_user);
    for (int r = 0; r < samples_per_user; ++r) {
      const Eigen::Index src = idx[static_cast<std::size_t>(u) * samples_per_user + r];
      ud.features.row(r) = data.features.row(src);
      ud.targets[r] = data.targets[src];
    }
    ds.users.push_back(std::move(ud));
  }
  return ds;
}

}  // namespace fldelay::fl
