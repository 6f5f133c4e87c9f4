#pragma once

#include <functional>
#include <string>
#include <utility>

namespace ctlopt {

/// Information available to the holder at time t: accumulated weighted
/// payoff x, cumulative control y and the current price s.
struct PolicyState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
};

/// Feedback control (t, x, y, s) -> u. Adaptedness holds by construction:
/// the rule only sees the current state.
class Policy {
 public:
  using Rule = std::function<double(const PolicyState&)>;

  Policy() = default;
  Policy(std::string name, Rule rule) : name_(std::move(name)), rule_(std::move(rule)) {}

  const std::string& name() const noexcept { return name_; }
  double operator()(const PolicyState& st) const { return rule_(st); }
  explicit operator bool() const noexcept { return static_cast<bool>(rule_); }

 private:
  std::string name_;
  Rule rule_;
};

}  // namespace ctlopt
