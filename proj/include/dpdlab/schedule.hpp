#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "dpdlab/error.hpp"

namespace dpdlab {

/// Step-size rule alpha^t.
struct StepSchedule {
  enum class Kind { constant, power, harmonic };

  Kind kind = Kind::power;
  double K = 1.0;   // constant value for Kind::constant
  double p = 0.6;

  static StepSchedule constant(double a) { return {Kind::constant, a, 0.0}; }
  static StepSchedule power(double K, double p) { return {Kind::power, K, p}; }
  static StepSchedule harmonic(double K) { return {Kind::harmonic, K, 1.0}; }

  double operator()(std::int64_t t) const {
    const double tp1 = static_cast<double>(t) + 1.0;
    switch (kind) {
      case Kind::constant: return K;
      case Kind::power: return K / std::pow(tp1, p);
      case Kind::harmonic: return K / tp1;
    }
    return 0.0;
  }

  /// Same rule with every step multiplied by `factor`.
  StepSchedule scaled(double factor) const {
    StepSchedule s = *this;
    s.K *= factor;
    return s;
  }

  /// sum alpha = inf and sum alpha^2 < inf.
  bool diminishing() const {
    return (kind == Kind::harmonic && K > 0.0) || (kind == Kind::power && K > 0.0 && p > 0.5 && p <= 1.0);
  }

  /// "const:a", "pow:K,p" or "harm:K".
  static StepSchedule parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error(Errc::parse_error, "schedule needs kind:args, got " + text);
    const std::string kind = text.substr(0, colon);
    const std::string args = text.substr(colon + 1);
    try {
      if (kind == "const") return constant(std::stod(args));
      if (kind == "harm") return harmonic(std::stod(args));
      if (kind == "pow") {
        const auto comma = args.find(',');
        if (comma == std::string::npos) throw Error(Errc::parse_error, "pow schedule needs K,p");
        return power(std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1)));
      }
    } catch (const std::logic_error&) {
      throw Error(Errc::parse_error, "bad schedule arguments: " + text);
    }
    throw Error(Errc::parse_error, "unknown schedule kind " + kind);
  }

  std::string to_string() const {
    auto num = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    switch (kind) {
      case Kind::constant: return "const:" + num(K);
      case Kind::power: return "pow:" + num(K) + "," + num(p);
      case Kind::harmonic: return "harm:" + num(K);
    }
    return "";
  }
};

}  // namespace dpdlab
