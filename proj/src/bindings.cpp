#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fldelay/fl_sim.hpp"
#include "fldelay/json_io.hpp"
#include "fldelay/model.hpp"
#include "fldelay/numerics.hpp"
#include "fldelay/optimizer.hpp"

namespace py = pybind11;
using namespace fldelay;

namespace {

model::ScenarioOverrides overrides_from_kwargs(const py::kwargs& kwargs) {
  model::ScenarioOverrides ov;
  for (const auto& item : kwargs) {
    const auto key = item.first.cast<std::string>();
    if (key == "p_max_dbm") ov.p_max_dbm = item.second.cast<double>();
    else if (key == "f_max_hz") ov.f_max_hz = item.second.cast<double>();
    else if (key == "bandwidth_hz") ov.bandwidth_hz = item.second.cast<double>();
    else if (key == "upload_bits") ov.upload_bits = item.second.cast<double>();
    else if (key == "samples") ov.samples = item.second.cast<std::int64_t>();
    else if (key == "lipschitz") ov.lipschitz = item.second.cast<double>();
    else if (key == "gamma") ov.gamma = item.second.cast<double>();
    else if (key == "xi") ov.xi = item.second.cast<double>();
    else if (key == "delta") ov.delta = item.second.cast<double>();
    else if (key == "epsilon0") ov.epsilon0 = item.second.cast<double>();
    else throw py::key_error("unknown override '" + key + "'");
  }
  return ov;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Delay-optimal resource allocation for federated learning over a "
      "wireless uplink, plus the federated training simulator.";

  // --- numerics -----------------------------------------------------------
  m.def("lambert_w_m1", &numerics::lambert_w_m1, py::arg("x"),
        "Secondary real branch of the Lambert W function on [-1/e, 0).");

  // --- model ---------------------------------------------------------------
  py::class_<model::UserProfile>(m, "UserProfile")
      .def(py::init<>())
      .def_readwrite("cycles_per_sample", &model::UserProfile::cycles_per_sample)
      .def_readwrite("samples", &model::UserProfile::samples)
      .def_readwrite("f_max", &model::UserProfile::f_max)
      .def_readwrite("p_max", &model::UserProfile::p_max)
      .def_readwrite("gain", &model::UserProfile::gain);

  py::class_<model::NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("bandwidth", &model::NetworkConfig::bandwidth)
      .def_readwrite("noise_psd", &model::NetworkConfig::noise_psd)
      .def_readwrite("upload_bits", &model::NetworkConfig::upload_bits);

  py::class_<model::LearningConfig>(m, "LearningConfig")
      .def(py::init<>())
      .def_readwrite("lipschitz", &model::LearningConfig::lipschitz)
      .def_readwrite("strong_convexity", &model::LearningConfig::strong_convexity)
      .def_readwrite("xi", &model::LearningConfig::xi)
      .def_readwrite("step", &model::LearningConfig::step)
      .def_readwrite("global_accuracy", &model::LearningConfig::global_accuracy);

  py::class_<model::DerivedConstants>(m, "DerivedConstants")
      .def_readonly("a", &model::DerivedConstants::a)
      .def_readonly("v", &model::DerivedConstants::v)
      .def_readonly("workload", &model::DerivedConstants::workload);

  py::class_<model::Scenario>(m, "Scenario")
      .def_readonly("users", &model::Scenario::users)
      .def_readonly("net", &model::Scenario::net)
      .def_readonly("learn", &model::Scenario::learn)
      .def_readonly("derived", &model::Scenario::derived)
      .def_readonly("seed", &model::Scenario::seed)
      .def("__repr__", [](const model::Scenario& sc) {
        return "<Scenario K=" + std::to_string(sc.users.size()) + ">";
      });

  m.def(
      "generate_scenario",
      [](std::uint64_t seed, int k, const py::kwargs& kwargs) {
        return model::generate_scenario(seed, k, overrides_from_kwargs(kwargs));
      },
      py::arg("seed"), py::arg("k"),
      "Random scenario with the stock defaults; keyword overrides: "
      "p_max_dbm, f_max_hz, bandwidth_hz, upload_bits, samples, lipschitz, "
      "gamma, xi, delta, epsilon0.");
  m.def("make_scenario", &model::make_scenario, py::arg("users"),
        py::arg("net"), py::arg("learn"), py::arg("seed") = 0);
  m.def("derive_constants", &model::derive_constants, py::arg("learn"),
        py::arg("users"));
  m.def("achievable_rate", &model::achievable_rate, py::arg("b"), py::arg("p"),
        py::arg("g"), py::arg("n0"));
  m.def("capacity_ceiling", &model::capacity_ceiling, py::arg("g"),
        py::arg("p"), py::arg("n0"));
  m.def("dbm_to_watts", &model::dbm_to_watts);
  m.def("db_to_linear", &model::db_to_linear);
  m.def("save_scenario", &io::save_scenario, py::arg("scenario"),
        py::arg("path"), py::arg("timestamp") = true);
  m.def("load_scenario", &io::load_scenario, py::arg("path"));

  // --- optimizer ------------------------------------------------------------
  py::enum_<opt::Scheme>(m, "Scheme")
      .value("Proposed", opt::Scheme::Proposed)
      .value("EbFdma", opt::Scheme::EbFdma)
      .value("FeFdma", opt::Scheme::FeFdma)
      .value("Tdma", opt::Scheme::Tdma);

  py::class_<numerics::Interval>(m, "Interval")
      .def_readonly("lo", &numerics::Interval::lo)
      .def_readonly("hi", &numerics::Interval::hi);

  py::class_<opt::SolverInfo>(m, "SolverInfo")
      .def_readonly("outer_iterations", &opt::SolverInfo::outer_iterations)
      .def_readonly("final_bracket_width", &opt::SolverInfo::final_bracket_width)
      .def_readonly("eta_domain", &opt::SolverInfo::eta_domain)
      .def_readonly("required_bandwidth", &opt::SolverInfo::required_bandwidth);

  py::class_<opt::Allocation>(m, "Allocation")
      .def_readonly("scheme", &opt::Allocation::scheme)
      .def_readonly("total_delay", &opt::Allocation::total_delay)
      .def_readonly("eta", &opt::Allocation::eta)
      .def_readonly("transmit_time", &opt::Allocation::transmit_time)
      .def_readonly("bandwidth", &opt::Allocation::bandwidth)
      .def_readonly("cpu", &opt::Allocation::cpu)
      .def_readonly("power", &opt::Allocation::power)
      .def_readonly("per_user_delay", &opt::Allocation::per_user_delay)
      .def_readonly("approximate_baseline", &opt::Allocation::approximate_baseline)
      .def_readonly("solver", &opt::Allocation::solver)
      .def("__repr__", [](const opt::Allocation& al) {
        return "<Allocation " + opt::scheme_name(al.scheme) + " T=" +
               std::to_string(al.total_delay) + " s>";
      });

  py::class_<opt::FeasibilityReport>(m, "FeasibilityReport")
      .def_readonly("feasible", &opt::FeasibilityReport::feasible)
      .def_readonly("eta_star", &opt::FeasibilityReport::eta_star)
      .def_readonly("required_bandwidth",
                    &opt::FeasibilityReport::required_bandwidth)
      .def_readonly("eta_domain", &opt::FeasibilityReport::eta_domain);

  m.def("required_bandwidth", &opt::required_bandwidth, py::arg("rate"),
        py::arg("g"), py::arg("p_max"), py::arg("n0"));
  m.def("total_required_bandwidth", &opt::total_required_bandwidth,
        py::arg("eta"), py::arg("T"), py::arg("scenario"));
  m.def("eta_domain", &opt::eta_domain, py::arg("T"), py::arg("scenario"));
  m.def(
      "solve_eta_star",
      [](double T, const model::Scenario& sc) {
        const auto es = opt::solve_eta_star(T, sc);
        return py::make_tuple(es.eta, es.bandwidth);
      },
      py::arg("T"), py::arg("scenario"),
      "Minimizer of the total required bandwidth over the admissible eta "
      "interval; returns (eta, bandwidth).");
  m.def("check_feasible", &opt::check_feasible, py::arg("T"),
        py::arg("scenario"));
  m.def("t_upper_bound", &opt::t_upper_bound, py::arg("scenario"));
  m.def("minimize_delay", &opt::minimize_delay, py::arg("scenario"),
        py::arg("rel_tol") = 1e-3);
  m.def("baseline_eb_fdma", &opt::baseline_eb_fdma, py::arg("scenario"));
  m.def("baseline_fe_fdma", &opt::baseline_fe_fdma, py::arg("scenario"),
        py::arg("rel_tol") = 1e-3);
  m.def("baseline_tdma", &opt::baseline_tdma, py::arg("scenario"));
  m.def("allocation_violations", &opt::allocation_violations,
        py::arg("allocation"), py::arg("scenario"));
  m.def("save_allocation", &io::save_allocation, py::arg("allocation"),
        py::arg("path"), py::arg("timestamp") = true);

  // --- fl_sim ----------------------------------------------------------------
  py::enum_<fl::LossKind>(m, "LossKind")
      .value("ConvexSquared", fl::LossKind::ConvexSquared)
      .value("NonconvexReluSquared", fl::LossKind::NonconvexReluSquared);

  py::class_<fl::LossSpec>(m, "LossSpec")
      .def(py::init([](fl::LossKind kind, double ridge) {
             return fl::LossSpec{kind, ridge};
           }),
           py::arg("kind") = fl::LossKind::ConvexSquared,
           py::arg("ridge") = 0.0)
      .def_readwrite("kind", &fl::LossSpec::kind)
      .def_readwrite("ridge", &fl::LossSpec::ridge);

  py::class_<fl::UserData>(m, "UserData")
      .def_readonly("features", &fl::UserData::features)
      .def_readonly("targets", &fl::UserData::targets);

  py::class_<fl::Dataset>(m, "Dataset")
      .def_readonly("users", &fl::Dataset::users)
      .def_readonly("dim", &fl::Dataset::dim)
      .def_readonly("optimal_loss", &fl::Dataset::optimal_loss);

  py::class_<fl::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("xi", &fl::TrainConfig::xi)
      .def_readwrite("step", &fl::TrainConfig::step)
      .def_readwrite("local_iter_coeff", &fl::TrainConfig::local_iter_coeff)
      .def_readwrite("global_accuracy", &fl::TrainConfig::global_accuracy);

  py::class_<fl::RoundRecord>(m, "RoundRecord")
      .def_readonly("round", &fl::RoundRecord::round)
      .def_readonly("global_loss", &fl::RoundRecord::global_loss)
      .def_readonly("accuracy_ratio", &fl::RoundRecord::accuracy_ratio)
      .def_readonly("local_iters", &fl::RoundRecord::local_iters);

  py::class_<fl::TrainLog>(m, "TrainLog")
      .def_readonly("rounds", &fl::TrainLog::rounds)
      .def_readonly("reached_accuracy", &fl::TrainLog::reached_accuracy);

  py::class_<fl::Smoothness>(m, "Smoothness")
      .def_readonly("lipschitz", &fl::Smoothness::lipschitz)
      .def_readonly("strong_convexity", &fl::Smoothness::strong_convexity)
      .def_readonly("degenerate", &fl::Smoothness::degenerate);

  m.def("synth_dataset", &fl::synth_dataset, py::arg("seed"), py::arg("k"),
        py::arg("dim"), py::arg("samples_per_user"),
        py::arg("condition_number"), py::arg("noise_std") = 0.0);
  m.def("estimate_smoothness", &fl::estimate_smoothness, py::arg("dataset"),
        py::arg("spec") = fl::LossSpec{});
  m.def("global_loss", &fl::global_loss, py::arg("w"), py::arg("dataset"),
        py::arg("spec"));
  m.def("federated_train", &fl::federated_train, py::arg("dataset"),
        py::arg("spec"), py::arg("eta"), py::arg("config"),
        py::arg("max_rounds"));

  m.attr("__version__") = "0.1.0";
}
