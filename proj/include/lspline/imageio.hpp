#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lspline/system.hpp"

namespace lspline {

/// Grayscale image, row-major, intensities in [0, 1].
struct Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t rows, std::size_t cols, double fill = 0.0);

  double& at(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
  std::size_t size() const { return pixels.size(); }
};

/// PGM (P2 or P5) or 8-bit grayscale PNG, chosen by file signature.
/// Throws UnsupportedFormat, ColorImage, CorruptHeader or IoError.
Image read_image(const std::filesystem::path& path);

/// 8-bit quantization with lround(v * 255) after clamping to [0, 1].
/// Format from the extension: .png, otherwise binary PGM.
void write_image(const Image& image, const std::filesystem::path& path);

/// Image pixels are the node values of make_image_grid(rows, cols).
Vector image_to_nodes(const Image& image);
Image nodes_to_image(const Vector& values, std::size_t rows, std::size_t cols);

/// Header x,y,z then one point per line. Throws CsvError naming the line.
DataSet read_points_csv(const std::filesystem::path& path);
DataSet parse_points_csv(std::istream& in);

/// Header x,y (a z column is allowed and ignored).
std::vector<Point> read_eval_points_csv(const std::filesystem::path& path);
std::vector<Point> parse_eval_points_csv(std::istream& in);

/// Header x,y,u and one row per grid node in node order.
void write_field_csv(std::ostream& out, const Grid& grid, const Vector& values);
void write_field_csv(const std::filesystem::path& path, const Grid& grid, const Vector& values);

/// Header x,y,u for arbitrary points.
void write_values_csv(std::ostream& out, const std::vector<Point>& points, const Vector& values);

}  // namespace lspline
