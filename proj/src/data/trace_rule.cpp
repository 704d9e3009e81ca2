#include "ccbm/data/trace_rule.hpp"

#include <cmath>
#include <sstream>

#include "ccbm/errors.hpp"

namespace ccbm::data {

fem::BoundaryTraceFn TraceRule::function() const {
  auto expect = [&](std::size_t n) {
    if (parameters.size() != n) {
      throw ConfigurationError("trace rule '" + name + "' takes " + std::to_string(n) + " parameters");
    }
  };
  if (name == "rotational") {
    expect(0);
    return [](const fem::BoundaryPoint& p) -> Eigen::Vector2cd {
      return {std::sin(p.theta), -std::cos(p.theta)};
    };
  }
  if (name == "constant") {
    expect(2);
    const Eigen::Vector2cd v(parameters[0], parameters[1]);
    return [v](const fem::BoundaryPoint&) -> Eigen::Vector2cd { return v; };
  }
  if (name == "zero") {
    expect(0);
    return [](const fem::BoundaryPoint&) -> Eigen::Vector2cd { return Eigen::Vector2cd::Zero(); };
  }
  throw ConfigurationError("unknown trace rule '" + name + "'");
}

std::string TraceRule::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << name;
  for (double p : parameters) os << ' ' << p;
  return os.str();
}

TraceRule TraceRule::parse(const std::string& text) {
  std::istringstream is(text);
  TraceRule rule;
  if (!(is >> rule.name)) throw ConfigurationError("empty trace rule");
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      rule.parameters.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigurationError("trace rule parameter '" + tok + "' is not a number");
    }
  }
  (void)rule.function();
  return rule;
}

}  // namespace ccbm::data
