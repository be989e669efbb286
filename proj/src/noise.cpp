#include "lspline/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lspline/error.hpp"
#include "lspline/random.hpp"

namespace lspline {
namespace {

constexpr std::uint64_t kGaussStream = 0x6761;
constexpr std::uint64_t kPickStream = 0x7069;
constexpr std::uint64_t kSaltStream = 0x7361;

void check_variance(double variance) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    std::ostringstream msg;
    msg << "noise variance must be finite and >= 0, got " << variance;
    throw InvalidArgument(msg.str());
  }
}

void check_density(double density) {
  if (!(density >= 0.0 && density <= 1.0)) {
    std::ostringstream msg;
    msg << "impulse density must lie in [0, 1], got " << density;
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

void NoiseSpec::validate() const {
  check_variance(gaussian_variance);
  check_density(impulse_density);
}

std::vector<double> add_gaussian(std::span<const double> values, double variance,
                                 std::uint64_t seed) {
  check_variance(variance);
  std::vector<double> out(values.begin(), values.end());
  if (variance == 0.0) return out;
  const double sigma = std::sqrt(variance);
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Box-Muller on two counter-based uniforms.
    const double u1 = unit_open(hash_draw(seed, kGaussStream, 2 * i));
    const double u2 = unit_open(hash_draw(seed, kGaussStream, 2 * i + 1));
    const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    out[i] += sigma * g;
  }
  return out;
}

std::vector<double> add_salt_pepper(std::span<const double> pixels, double density,
                                    std::uint64_t seed) {
  check_density(density);
  std::vector<double> out(pixels.begin(), pixels.end());
  const std::size_t n = out.size();
  const auto count = static_cast<std::size_t>(std::llround(density * static_cast<double>(n)));
  if (count == 0) return out;
  // The pixels with the smallest hash keys form a uniform sample without
  // replacement.
  std::vector<std::pair<std::uint64_t, std::size_t>> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = {hash_draw(seed, kPickStream, i), i};
  if (count < n)
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end());
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = keys[k].second;
    out[i] = (hash_draw(seed, kSaltStream, i) >> 63) ? 1.0 : 0.0;
  }
  return out;
}

std::vector<std::uint8_t> detect_impulses(std::span<const double> pixels, double epsilon) {
  std::vector<std::uint8_t> mask(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i)
    mask[i] = (pixels[i] > epsilon && pixels[i] < 1.0 - epsilon) ? 1 : 0;
  return mask;
}

std::vector<double> clip_unit(std::span<const double> values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::clamp(values[i], 0.0, 1.0);
  return out;
}

std::vector<double> corrupt(std::span<const double> pixels, const NoiseSpec& spec) {
  spec.validate();
  const std::vector<double> noisy = clip_unit(add_gaussian(pixels, spec.gaussian_variance, spec.seed));
  return add_salt_pepper(noisy, spec.impulse_density, spec.seed);
}

}  // namespace lspline
