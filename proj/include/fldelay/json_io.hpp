#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>

#include "fldelay/model.hpp"
#include "fldelay/optimizer.hpp"

namespace fldelay::io {

/// Malformed or missing fields in a structured input; `pointer` locates the
/// offending field (JSON-pointer style, e.g. "/users/3/gain_linear").
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : std::runtime_error(pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

nlohmann::json scenario_to_json(const model::Scenario& sc);
model::Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json allocation_to_json(const opt::Allocation& al);

void save_scenario(const model::Scenario& sc, const std::string& path,
                   bool timestamp = true);
model::Scenario load_scenario(const std::string& path);

void save_allocation(const opt::Allocation& al, const std::string& path,
                     bool timestamp = true);

}  // namespace fldelay::io
