#pragma once

#include <functional>
#include <optional>
#include <span>

#include "lspline/system.hpp"

namespace lspline {

/// Mean of squared differences. Throws ShapeMismatch or EmptyData.
double mse(std::span<const double> reference, std::span<const double> estimate);

/// 10 log10(max^2 / mse); nullopt stands for +infinity (mse == 0).
std::optional<double> psnr_from_mse(double mse_value, double max_value);
std::optional<double> psnr(std::span<const double> reference, std::span<const double> estimate,
                           double max_value);

struct QualityReport {
  double mse = 0.0;
  std::optional<double> psnr_db;
  double max_abs_error = 0.0;
};

QualityReport quality(std::span<const double> reference, std::span<const double> estimate,
                      double max_value);

using ScalarField = std::function<double(double x, double y)>;

struct SpikeReport {
  double max_abs_error = 0.0;
  std::size_t node = 0;
  Point location;
};

/// Largest |u_i - f(node_i)| over the grid nodes of the solution.
SpikeReport spike_diagnostic(const SplineSolution& solution, const ScalarField& reference);

}  // namespace lspline
