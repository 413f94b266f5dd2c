#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fldelay/json_io.hpp"
#include "fldelay/model.hpp"
#include "fldelay/optimizer.hpp"
#include "fldelay/sweep.hpp"

using namespace fldelay;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("json_io") {

TEST_CASE("scenario round trip is exact") {
  const auto sc = model::generate_scenario(7, 5);
  const auto back = io::scenario_from_json(io::scenario_to_json(sc));
  REQUIRE(back.users.size() == sc.users.size());
  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    CHECK(back.users[k].gain == sc.users[k].gain);
    CHECK(back.users[k].cycles_per_sample == sc.users[k].cycles_per_sample);
    CHECK(back.users[k].samples == sc.users[k].samples);
  }
  CHECK(back.net.bandwidth == sc.net.bandwidth);
  CHECK(back.net.noise_psd == sc.net.noise_psd);
  CHECK(back.learn.xi == sc.learn.xi);
  CHECK(back.seed == sc.seed);
  // derived constants are recomputed, never read
  CHECK(back.derived.a == sc.derived.a);
  CHECK(back.derived.workload == sc.derived.workload);
  CHECK_FALSE(io::scenario_to_json(sc).contains("derived"));
}

TEST_CASE("schema errors carry JSON pointers") {
  auto j = io::scenario_to_json(model::generate_scenario(1, 3));

  SUBCASE("missing field") {
    j["users"][1].erase("gain_linear");
    try {
      io::scenario_from_json(j);
      FAIL("expected a schema error");
    } catch (const io::SchemaError& e) {
      CHECK(e.pointer() == "/users/1/gain_linear");
    }
  }
  SUBCASE("wrong type") {
    j["network"]["bandwidth_hz"] = "wide";
    try {
      io::scenario_from_json(j);
      FAIL("expected a schema error");
    } catch (const io::SchemaError& e) {
      CHECK(e.pointer() == "/network/bandwidth_hz");
    }
  }
  SUBCASE("invalid value surfaces the validation message") {
    j["users"][2]["p_max_w"] = -1.0;
    CHECK_THROWS_AS(io::scenario_from_json(j), io::SchemaError);
  }
  SUBCASE("empty user list") {
    j["users"] = json::array();
    CHECK_THROWS_AS(io::scenario_from_json(j), io::SchemaError);
  }
}

TEST_CASE("scenario files round trip through disk") {
  const auto path = temp_path("fldelay_scenario.json");
  const auto sc = model::generate_scenario(11, 4);
  io::save_scenario(sc, path, false);
  const auto back = io::load_scenario(path);
  CHECK(back.users[3].gain == sc.users[3].gain);

  // timestamped saves differ only by the timestamp field
  io::save_scenario(sc, path, true);
  std::ifstream in(path);
  json j;
  in >> j;
  CHECK(j.contains("generated_at_utc"));
  std::filesystem::remove(path);
}

TEST_CASE("malformed JSON reports a parse failure") {
  const auto path = temp_path("fldelay_broken.json");
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(io::load_scenario(path), io::SchemaError);
  std::filesystem::remove(path);
}

TEST_CASE("allocation serialization carries the solver metadata") {
  const auto sc = model::generate_scenario(2, 3);
  const auto al = opt::minimize_delay(sc);
  const auto j = io::allocation_to_json(al);
  CHECK(j["scheme"] == "proposed");
  CHECK(j["total_delay_s"].get<double>() == al.total_delay);
  CHECK(j["bandwidth_hz"].size() == 3);
  CHECK(j["solver"]["outer_iterations"].get<int>() ==
        al.solver.outer_iterations);
  CHECK(j["solver"]["eta_domain"].is_array());
  CHECK(j["approximate_baseline"] == false);

  const auto td = io::allocation_to_json(opt::baseline_tdma(sc));
  CHECK(td["approximate_baseline"] == true);
  CHECK(td["solver"]["eta_domain"].is_null());
}

}  // TEST_SUITE

TEST_SUITE("sweep") {

TEST_CASE("single value and draw matches the direct solve") {
  sweep::SweepSpec spec;
  spec.param = sweep::SweepParam::PMaxDbm;
  spec.values = {10.0};
  spec.draws = 1;
  spec.base_seed = 4;
  spec.user_count = 3;
  const auto rows = sweep::run_sweep(spec, {opt::Scheme::Proposed});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].draws == 1);
  CHECK(rows[0].std_delay == 0.0);

  model::ScenarioOverrides ov;
  ov.p_max_dbm = 10.0;
  const auto sc = model::generate_scenario(4, 3, ov);
  CHECK(rows[0].mean_delay ==
        doctest::Approx(opt::minimize_delay(sc).total_delay).epsilon(1e-12));
}

TEST_CASE("sweeps are deterministic across runs") {
  sweep::SweepSpec spec;
  spec.param = sweep::SweepParam::UserCount;
  spec.values = {2.0, 4.0};
  spec.draws = 6;
  spec.base_seed = 12;
  const auto a = sweep::run_sweep(spec, {opt::Scheme::Proposed, opt::Scheme::Tdma});
  const auto b = sweep::run_sweep(spec, {opt::Scheme::Proposed, opt::Scheme::Tdma});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean_delay == b[i].mean_delay);
    CHECK(a[i].std_delay == b[i].std_delay);
  }
  CHECK(sweep::sweep_csv(a) == sweep::sweep_csv(b));
}

TEST_CASE("csv shape") {
  sweep::SweepSpec spec;
  spec.param = sweep::SweepParam::BandwidthHz;
  spec.values = {1e7};
  spec.draws = 2;
  spec.user_count = 2;
  const auto rows = sweep::run_sweep(spec, {opt::Scheme::EbFdma});
  const auto csv = sweep::sweep_csv(rows);
  CHECK(csv.rfind("parameter_value,scheme,mean_delay_s,std_delay_s,draws,error\n",
                  0) == 0);
  CHECK(csv.find("eb-fdma") != std::string::npos);
}

TEST_CASE("proposed beats tdma on the stock draw, gap recorded") {
  sweep::SweepSpec spec;
  spec.param = sweep::SweepParam::PMaxDbm;
  spec.values = {10.0};
  spec.draws = 10;
  spec.user_count = 20;
  const auto rows =
      sweep::run_sweep(spec, {opt::Scheme::Proposed, opt::Scheme::Tdma});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].mean_delay < rows[1].mean_delay);
  MESSAGE("proposed vs tdma mean gap: ",
          (1.0 - rows[0].mean_delay / rows[1].mean_delay) * 100.0, "%");
}

TEST_CASE("a failing draw becomes error rows instead of aborting") {
  sweep::SweepSpec spec;
  spec.param = sweep::SweepParam::UserCount;
  spec.values = {0.0, 2.0};  // zero users cannot be drawn
  spec.draws = 2;
  const auto rows = sweep::run_sweep(spec, {opt::Scheme::Proposed});
  REQUIRE(rows.size() >= 3);
  // value 0: an aggregate row over zero successes plus one error row per draw
  CHECK(rows[0].parameter_value == 0.0);
  CHECK(rows[0].draws == 0);
  CHECK(rows[1].error.find("draw 0") == 0);
  CHECK(rows[2].error.find("draw 1") == 0);
  // value 2 still solves normally
  CHECK(rows.back().draws == 2);
  CHECK(rows.back().error.empty());
  const auto csv = sweep::sweep_csv(rows);
  CHECK(csv.find("\"draw 0:") != std::string::npos);
}

TEST_CASE("parameter names round trip") {
  for (const auto p :
       {sweep::SweepParam::PMaxDbm, sweep::SweepParam::BandwidthHz,
        sweep::SweepParam::UserCount, sweep::SweepParam::UploadBits})
    CHECK(sweep::param_from_name(sweep::param_name(p)) == p);
  CHECK_FALSE(sweep::param_from_name("frequency").has_value());
}

}  // TEST_SUITE
