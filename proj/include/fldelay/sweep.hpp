#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fldelay/model.hpp"
#include "fldelay/optimizer.hpp"

namespace fldelay::sweep {

enum class SweepParam { PMaxDbm, BandwidthHz, UserCount, UploadBits };

std::string param_name(SweepParam p);
std::optional<SweepParam> param_from_name(const std::string& name);

struct SweepSpec {
  SweepParam param = SweepParam::PMaxDbm;
  std::vector<double> values;
  int draws = 50;
  std::uint64_t base_seed = 0;
  int user_count = 50;  // K when the swept parameter is not K itself
};

/// One aggregate row per (value, scheme); failed draws become their own rows
/// carrying the error text so a sweep never aborts.
struct SweepRow {
  double parameter_value;
  opt::Scheme scheme;
  double mean_delay = 0.0;
  double std_delay = 0.0;
  int draws = 0;  // successful draws behind mean/std; 1 for an error row
  std::string error;
};

/// Runs every (value, draw, scheme) cell; the scenario for draw i uses seed
/// base_seed + i. Draws run in parallel with a fixed-order reduction, so
/// output is deterministic.
std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                const std::vector<opt::Scheme>& schemes);

/// RFC-4180-style CSV with header
/// parameter_value,scheme,mean_delay_s,std_delay_s,draws,error.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace fldelay::sweep
