#include "ctlopt/estimate.hpp"

namespace ctlopt {

std::string to_string(Method m) {
  switch (m) {
    case Method::hjb: return "hjb";
    case Method::closed_form: return "closed_form";
    case Method::monte_carlo: return "monte_carlo";
  }
  return "?";
}

nlohmann::json to_json(const PriceEstimate& e) {
  return {{"value", e.value}, {"stderr", e.stderr_}, {"method", to_string(e.method)}, {"meta", e.meta}};
}

}  // namespace ctlopt
