#include "fldelay/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace fldelay::sweep {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct DrawResult {
  double delay = 0.0;
  std::string error;
};

DrawResult solve_one(const model::Scenario& sc, opt::Scheme scheme) {
  try {
    opt::Allocation al;
    switch (scheme) {
      case opt::Scheme::Proposed: al = opt::minimize_delay(sc); break;
      case opt::Scheme::EbFdma: al = opt::baseline_eb_fdma(sc); break;
      case opt::Scheme::FeFdma: al = opt::baseline_fe_fdma(sc); break;
      case opt::Scheme::Tdma: al = opt::baseline_tdma(sc); break;
    }
    return {al.total_delay, ""};
  } catch (const std::exception& e) {
    return {0.0, e.what()};
  }
}

}  // namespace

std::string param_name(SweepParam p) {
  switch (p) {
    case SweepParam::PMaxDbm: return "p_max_dbm";
    case SweepParam::BandwidthHz: return "bandwidth_hz";
    case SweepParam::UserCount: return "k";
    case SweepParam::UploadBits: return "upload_bits";
  }
  return "unknown";
}

std::optional<SweepParam> param_from_name(const std::string& name) {
  if (name == "p_max_dbm") return SweepParam::PMaxDbm;
  if (name == "bandwidth_hz") return SweepParam::BandwidthHz;
  if (name == "k") return SweepParam::UserCount;
  if (name == "upload_bits") return SweepParam::UploadBits;
  return std::nullopt;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                const std::vector<opt::Scheme>& schemes) {
  if (spec.values.empty())
    throw std::invalid_argument("run_sweep: empty value list");
  if (spec.draws < 1) throw std::invalid_argument("run_sweep: draws >= 1");

  std::vector<SweepRow> rows;
  for (const double value : spec.values) {
    model::ScenarioOverrides ov;
    int k = spec.user_count;
    switch (spec.param) {
      case SweepParam::PMaxDbm: ov.p_max_dbm = value; break;
      case SweepParam::BandwidthHz: ov.bandwidth_hz = value; break;
      case SweepParam::UserCount: k = static_cast<int>(value); break;
      case SweepParam::UploadBits: ov.upload_bits = value; break;
    }

    // All draws for this value, parallel over draw index.
    std::vector<std::vector<DrawResult>> results(
        static_cast<std::size_t>(spec.draws));
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int i = next.fetch_add(1); i < spec.draws; i = next.fetch_add(1)) {
        auto& slot = results[static_cast<std::size_t>(i)];
        slot.reserve(schemes.size());
        try {
          const auto sc = model::generate_scenario(
              spec.base_seed + static_cast<std::uint64_t>(i), k, ov);
          for (const auto scheme : schemes)
            slot.push_back(solve_one(sc, scheme));
        } catch (const std::exception& e) {
          // a bad draw (e.g. an invalid swept value) becomes an error row
          // for every scheme; the sweep itself never aborts
          slot.assign(schemes.size(), {0.0, e.what()});
        }
      }
    };
    const unsigned n_threads =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(spec.draws));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (std::size_t s = 0; s < schemes.size(); ++s) {
      double sum = 0.0, sum_sq = 0.0;
      int ok = 0;
      for (int i = 0; i < spec.draws; ++i) {  // fixed-order reduction
        const auto& r = results[static_cast<std::size_t>(i)][s];
        if (!r.error.empty()) continue;
        sum += r.delay;
        sum_sq += r.delay * r.delay;
        ++ok;
      }
      SweepRow row;
      row.parameter_value = value;
      row.scheme = schemes[s];
      row.draws = ok;
      if (ok > 0) {
        row.mean_delay = sum / ok;
        const double var =
            ok > 1 ? std::max(0.0, (sum_sq - sum * sum / ok) / (ok - 1)) : 0.0;
        row.std_delay = std::sqrt(var);
      }
      rows.push_back(row);
      for (int i = 0; i < spec.draws; ++i) {
        const auto& r = results[static_cast<std::size_t>(i)][s];
        if (r.error.empty()) continue;
        SweepRow err;
        err.parameter_value = value;
        err.scheme = schemes[s];
        err.draws = 1;
        err.error = "draw " + std::to_string(i) + ": " + r.error;
        rows.push_back(err);
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "parameter_value,scheme,mean_delay_s,std_delay_s,draws,error\n";
  for (const auto& r : rows) {
    out << format_double(r.parameter_value) << ',' << opt::scheme_name(r.scheme)
        << ',';
    if (r.error.empty() && r.draws > 0)
      out << format_double(r.mean_delay) << ',' << format_double(r.std_delay);
    else
      out << ',';
    out << ',' << r.draws << ',';
    if (!r.error.empty()) {
      std::string quoted = r.error;
      std::string::size_type pos = 0;
      while ((pos = quoted.find('"', pos)) != std::string::npos) {
        quoted.insert(pos, 1, '"');
        pos += 2;
      }
      out << '"' << quoted << '"';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace fldelay::sweep
