#pragma once

#include <string>

#include <json.hpp>

namespace ctlopt {

enum class Method { hjb, closed_form, monte_carlo };

std::string to_string(Method m);

/// A price with its error bar and the metadata needed to reproduce it.
/// stderr_ is 0 for deterministic methods.
struct PriceEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  Method method = Method::closed_form;
  nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json to_json(const PriceEstimate& e);

}  // namespace ctlopt
