#include "lspline/metrics.hpp"

#include <cmath>
#include <sstream>

#include "lspline/error.hpp"

namespace lspline {

double mse(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) {
    std::ostringstream msg;
    msg << "mse: reference has " << reference.size() << " values, estimate " << estimate.size();
    throw ShapeMismatch(msg.str());
  }
  if (reference.empty()) throw EmptyData("mse of empty arrays");
  double sum = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - estimate[i];
    sum += d * d;
  }
  return sum / static_cast<double>(reference.size());
}

std::optional<double> psnr_from_mse(double mse_value, double max_value) {
  if (!(max_value > 0.0)) throw InvalidArgument("PSNR peak value must be positive");
  if (mse_value == 0.0) return std::nullopt;
  return 20.0 * std::log10(max_value / std::sqrt(mse_value));
}

std::optional<double> psnr(std::span<const double> reference, std::span<const double> estimate,
                           double max_value) {
  return psnr_from_mse(mse(reference, estimate), max_value);
}

QualityReport quality(std::span<const double> reference, std::span<const double> estimate,
                      double max_value) {
  QualityReport q;
  q.mse = mse(reference, estimate);
  q.psnr_db = psnr_from_mse(q.mse, max_value);
  for (std::size_t i = 0; i < reference.size(); ++i)
    q.max_abs_error = std::max(q.max_abs_error, std::abs(reference[i] - estimate[i]));
  return q;
}

SpikeReport spike_diagnostic(const SplineSolution& solution, const ScalarField& reference) {
  SpikeReport r;
  const Grid& g = solution.grid;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point p = g.node(k);
    const double e =
        std::abs(solution.coefficients[static_cast<Eigen::Index>(k)] - reference(p.x, p.y));
    if (e > r.max_abs_error || k == 0) {
      r.max_abs_error = e;
      r.node = k;
      r.location = p;
    }
  }
  return r;
}

}  // namespace lspline
