#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sbg/errors.hpp"

namespace sbg {

enum class ModulationKind { cosine, linear };

inline const char* to_string(ModulationKind k) {
  return k == ModulationKind::cosine ? "cosine" : "linear";
}

/// Second row t_1..t_N of the 2 x N modulation matrix (the first row is all
/// ones). Values are stored 0-based: value(j) is t_{j+1}.
class ModulationSpec {
 public:
  ModulationSpec() = default;

  /// t_n = n / N.
  static ModulationSpec linear(std::size_t n) {
    if (n == 0) throw InvalidArgument("modulation length must be positive");
    ModulationSpec s;
    s.kind_ = ModulationKind::linear;
    s.values_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      s.values_[j] = static_cast<double>(j + 1) / static_cast<double>(n);
    }
    return s;
  }

  /// t_n = 2 cos(n omega), omega in (0, pi/(2N)]; defaults to pi/(2N).
  static ModulationSpec cosine(std::size_t n, std::optional<double> omega = std::nullopt) {
    if (n == 0) throw InvalidArgument("modulation length must be positive");
    const double max_omega = std::numbers::pi / (2.0 * static_cast<double>(n));
    const double w = omega.value_or(max_omega);
    if (!(w > 0.0) || w > max_omega * (1.0 + 1e-12)) {
      throw InvalidArgument("cosine modulation needs omega in (0, pi/(2N)]");
    }
    ModulationSpec s;
    s.kind_ = ModulationKind::cosine;
    s.omega_ = w;
    s.values_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      s.values_[j] = 2.0 * std::cos(static_cast<double>(j + 1) * w);
    }
    return s;
  }

  ModulationKind kind() const { return kind_; }
  double omega() const { return omega_; }
  std::size_t size() const { return values_.size(); }
  double value(std::size_t j) const { return values_.at(j); }
  const std::vector<double>& values() const { return values_; }

  /// Closed-form singleton inversion. Returns the 0-based value index
  /// (real-valued, before snapping). `clamped` is set when the cosine ratio
  /// falls outside [0, 1) and had to be clamped.
  double index_from_pair(double y1, double y2, bool& clamped) const {
    clamped = false;
    const auto n = static_cast<double>(values_.size());
    if (kind_ == ModulationKind::linear) return n * y2 / y1 - 1.0;
    double arg = y2 / (2.0 * y1);
    constexpr double kUpper = 1.0 - 1e-12;
    if (arg < 0.0 || arg > kUpper) {
      clamped = true;
      arg = std::clamp(arg, 0.0, kUpper);
    }
    return std::acos(arg) / omega_ - 1.0;
  }

 private:
  ModulationKind kind_ = ModulationKind::linear;
  double omega_ = 0.0;
  std::vector<double> values_;
};

}  // namespace sbg
