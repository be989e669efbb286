#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lspline {

/// Half an 8-bit grey level; pixels within it of 0 or 1 count as impulses.
inline constexpr double kImpulseEpsilon = 1.0 / 510.0;

struct NoiseSpec {
  double gaussian_variance = 0.0;
  double impulse_density = 0.0;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Independent N(0, variance) increments; value i depends only on (seed, i).
std::vector<double> add_gaussian(std::span<const double> values, double variance,
                                 std::uint64_t seed);

/// round(density * size) pixels chosen without replacement are set to 0 or 1
/// with equal probability.
std::vector<double> add_salt_pepper(std::span<const double> pixels, double density,
                                    std::uint64_t seed);

/// 1 where the pixel lies strictly inside (eps, 1 - eps).
std::vector<std::uint8_t> detect_impulses(std::span<const double> pixels,
                                          double epsilon = kImpulseEpsilon);

std::vector<double> clip_unit(std::span<const double> values);

/// Gaussian, clip to [0, 1], salt and pepper.
std::vector<double> corrupt(std::span<const double> pixels, const NoiseSpec& spec);

}  // namespace lspline
