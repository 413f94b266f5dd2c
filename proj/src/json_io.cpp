#include "fldelay/json_io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

namespace fldelay::io {

using nlohmann::json;

namespace {

const json& member(const json& j, const std::string& key,
                    const std::string& pointer) {
  if (!j.is_object())
    throw SchemaError(pointer.empty() ? "/" : pointer, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(pointer + "/" + key, "missing field");
  return *it;
}

double number(const json& j, const std::string& key,
              const std::string& pointer) {
  const json& v = member(j, key, pointer);
  if (!v.is_number())
    throw SchemaError(pointer + "/" + key, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& j, const std::string& key,
                     const std::string& pointer) {
  const json& v = member(j, key, pointer);
  if (!v.is_number_integer())
    throw SchemaError(pointer + "/" + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out)
    throw std::runtime_error("failed while writing '" + path + "'");
}

}  // namespace

json scenario_to_json(const model::Scenario& sc) {
  json users = json::array();
  for (const auto& u : sc.users) {
    users.push_back({{"c_cycles_per_sample", u.cycles_per_sample},
                     {"d_samples", u.samples},
                     {"f_max_hz", u.f_max},
                     {"p_max_w", u.p_max},
                     {"gain_linear", u.gain}});
  }
  return json{{"users", std::move(users)},
              {"network",
               {{"bandwidth_hz", sc.net.bandwidth},
                {"noise_psd_w_per_hz", sc.net.noise_psd},
                {"upload_bits", sc.net.upload_bits}}},
              {"learning",
               {{"lipschitz", sc.learn.lipschitz},
                {"gamma", sc.learn.strong_convexity},
                {"xi", sc.learn.xi},
                {"delta", sc.learn.step},
                {"epsilon0", sc.learn.global_accuracy}}},
              {"seed", sc.seed}};
}

model::Scenario scenario_from_json(const json& j) {
  const json& users = member(j, "users", "");
  if (!users.is_array() || users.empty())
    throw SchemaError("/users", "expected a nonempty array");

  std::vector<model::UserProfile> profile;
  profile.reserve(users.size());
  for (std::size_t k = 0; k < users.size(); ++k) {
    const std::string at = "/users/" + std::to_string(k);
    model::UserProfile u;
    u.cycles_per_sample = number(users[k], "c_cycles_per_sample", at);
    u.samples = integer(users[k], "d_samples", at);
    u.f_max = number(users[k], "f_max_hz", at);
    u.p_max = number(users[k], "p_max_w", at);
    u.gain = number(users[k], "gain_linear", at);
    profile.push_back(u);
  }

  const json& net_j = member(j, "network", "");
  model::NetworkConfig net;
  net.bandwidth = number(net_j, "bandwidth_hz", "/network");
  net.noise_psd = number(net_j, "noise_psd_w_per_hz", "/network");
  net.upload_bits = number(net_j, "upload_bits", "/network");

  const json& learn_j = member(j, "learning", "");
  model::LearningConfig learn;
  learn.lipschitz = number(learn_j, "lipschitz", "/learning");
  learn.strong_convexity = number(learn_j, "gamma", "/learning");
  learn.xi = number(learn_j, "xi", "/learning");
  learn.step = number(learn_j, "delta", "/learning");
  learn.global_accuracy = number(learn_j, "epsilon0", "/learning");

  std::uint64_t seed = 0;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer())
      throw SchemaError("/seed", "expected an integer");
    seed = j["seed"].get<std::uint64_t>();
  }

  try {
    return model::make_scenario(std::move(profile), net, learn, seed);
  } catch (const std::exception& e) {
    throw SchemaError("/", e.what());
  }
}

json allocation_to_json(const opt::Allocation& al) {
  json solver{{"outer_iterations", al.solver.outer_iterations},
              {"final_bracket_width_s", al.solver.final_bracket_width},
              {"required_bandwidth_hz", al.solver.required_bandwidth}};
  if (al.solver.eta_domain)
    solver["eta_domain"] = {al.solver.eta_domain->lo, al.solver.eta_domain->hi};
  else
    solver["eta_domain"] = nullptr;

  return json{{"scheme", opt::scheme_name(al.scheme)},
              {"approximate_baseline", al.approximate_baseline},
              {"total_delay_s", al.total_delay},
              {"eta", al.eta},
              {"transmit_time_s", al.transmit_time},
              {"bandwidth_hz", al.bandwidth},
              {"cpu_hz", al.cpu},
              {"power_w", al.power},
              {"per_user_delay_s", al.per_user_delay},
              {"solver", std::move(solver)}};
}

void save_scenario(const model::Scenario& sc, const std::string& path,
                   bool timestamp) {
  json j = scenario_to_json(sc);
  if (timestamp) j["generated_at_utc"] = utc_now();
  write_file(j, path);
}

model::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

void save_allocation(const opt::Allocation& al, const std::string& path,
                     bool timestamp) {
  json j = allocation_to_json(al);
  if (timestamp) j["generated_at_utc"] = utc_now();
  write_file(j, path);
}

}  // namespace fldelay::io
