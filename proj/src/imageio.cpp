#include "lspline/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <sstream>
#include <string>

#include "lspline/error.hpp"

namespace lspline {

Image::Image(std::size_t r, std::size_t c, double fill) : rows(r), cols(c), pixels(r * c, fill) {}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// PGM header tokens, skipping whitespace and # comments.
class PgmCursor {
public:
  explicit PgmCursor(const std::string& data) : data_(data) {}

  long next_int(const char* what) {
    skip();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    long value = 0;
    const auto res = std::from_chars(data_.data() + start, data_.data() + pos_, value);
    if (start == pos_ || res.ec != std::errc())
      throw CorruptHeader(std::string("PGM header: expected ") + what);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

private:
  void skip() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& data_;
  std::size_t pos_ = 2;
};

Image read_pgm(const std::string& data, bool binary) {
  PgmCursor cur(data);
  const long cols = cur.next_int("width");
  const long rows = cur.next_int("height");
  const long maxval = cur.next_int("maxval");
  if (cols <= 0 || rows <= 0) throw CorruptHeader("PGM header: non-positive dimensions");
  if (maxval <= 0 || maxval > 65535) throw CorruptHeader("PGM header: maxval outside 1..65535");
  Image img(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  const double scale = 1.0 / static_cast<double>(maxval);
  if (binary) {
    cur.advance(1);  // the single whitespace byte after maxval
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    if (data.size() < cur.pos() + img.size() * bytes)
      throw IoError("PGM raster is shorter than the header promises");
    const auto* raw = reinterpret_cast<const unsigned char*>(data.data() + cur.pos());
    for (std::size_t k = 0; k < img.size(); ++k) {
      const unsigned v = bytes == 2 ? (raw[2 * k] << 8u) | raw[2 * k + 1] : raw[k];
      if (v > static_cast<unsigned>(maxval)) throw IoError("PGM sample exceeds maxval");
      img.pixels[k] = v * scale;
    }
  } else {
    for (std::size_t k = 0; k < img.size(); ++k) {
      long v = 0;
      try {
        v = cur.next_int("sample");
      } catch (const CorruptHeader&) {
        throw IoError("PGM raster is shorter than the header promises");
      }
      if (v > maxval) throw IoError("PGM sample exceeds maxval");
      img.pixels[k] = static_cast<double>(v) * scale;
    }
  }
  return img;
}

struct PngReadState {
  const std::string* data;
  std::size_t pos;
};

void png_read_from_string(png_structp png, png_bytep out, png_size_t length) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + length > st->data->size()) png_error(png, "truncated PNG stream");
  std::copy_n(st->data->data() + st->pos, length, out);
  st->pos += length;
}

[[noreturn]] void png_throw(png_structp, png_const_charp msg) { throw IoError(std::string("PNG: ") + msg); }
void png_quiet(png_structp, png_const_charp) {}

Image read_png(const std::string& data) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_quiet);
  if (!png) throw IoError("PNG: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  std::unique_ptr<png_structp, void (*)(png_structp*)> guard_png(&png, [](png_structp* p) {
    png_destroy_read_struct(p, nullptr, nullptr);
  });
  struct InfoGuard {
    png_structp png;
    png_infop info;
    ~InfoGuard() {
      if (info) png_destroy_info_struct(png, &info);
    }
  } guard_info{png, info};
  if (!info) throw IoError("PNG: cannot allocate info");

  PngReadState st{&data, 0};
  png_set_read_fn(png, &st, png_read_from_string);
  png_read_info(png, info);
  const png_uint_32 cols = png_get_image_width(png, info);
  const png_uint_32 rows = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color & PNG_COLOR_MASK_COLOR) throw ColorImage("PNG is colour; only grayscale is accepted");
  if (color != PNG_COLOR_TYPE_GRAY) throw UnsupportedFormat("PNG with alpha channel is not supported");
  if (depth > 8) throw UnsupportedFormat("only 8-bit grayscale PNG is supported");
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  Image img(rows, cols);
  std::vector<png_byte> row(cols);
  for (png_uint_32 r = 0; r < rows; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 c = 0; c < cols; ++c) img.at(r, c) = row[c] / 255.0;
  }
  return img;
}

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_png(const Image& image, const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> guard_fp(fp, std::fclose);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_quiet);
  if (!png) throw IoError("PNG: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp png;
    png_infop info;
    ~Guard() { png_destroy_write_struct(&png, &info); }
  } guard{png, info};
  if (!info) throw IoError("PNG: cannot allocate info");
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols), static_cast<png_uint_32>(image.rows),
               8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(image.cols);
  for (std::size_t r = 0; r < image.rows; ++r) {
    for (std::size_t c = 0; c < image.cols; ++c) row[c] = quantize(image.at(r, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

void write_pgm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << image.cols << ' ' << image.rows << "\n255\n";
  std::vector<char> raster(image.size());
  for (std::size_t k = 0; k < image.size(); ++k)
    raster[k] = static_cast<char>(quantize(image.pixels[k]));
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() >= 2 && data[0] == 'P') {
    switch (data[1]) {
      case '2': return read_pgm(data, false);
      case '5': return read_pgm(data, true);
      case '3':
      case '6': throw ColorImage("'" + path.string() + "' is a colour PPM");
      default: break;
    }
  }
  static constexpr std::array<unsigned char, 8> kPngSignature{0x89, 'P', 'N', 'G',
                                                              '\r', '\n', 0x1a, '\n'};
  if (data.size() >= 8 && std::equal(kPngSignature.begin(), kPngSignature.end(),
                                     reinterpret_cast<const unsigned char*>(data.data())))
    return read_png(data);
  throw UnsupportedFormat("'" + path.string() + "' is neither PGM nor PNG");
}

void write_image(const Image& image, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") write_png(image, path);
  else write_pgm(image, path);
}

Vector image_to_nodes(const Image& image) {
  return Eigen::Map<const Vector>(image.pixels.data(), static_cast<Eigen::Index>(image.size()));
}

Image nodes_to_image(const Vector& values, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(values.size()) != rows * cols)
    throw ShapeMismatch("node vector length does not match the image shape");
  Image img(rows, cols);
  std::copy(values.begin(), values.end(), img.pixels.begin());
  return img;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, const char* column, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() ||
      !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "line " << line_no << ": column " << column << " is not a number: '" << field << "'";
    throw CsvError(msg.str(), line_no);
  }
  return v;
}

}  // namespace

DataSet parse_points_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw CsvError("line 1: missing header x,y,z", 1);
  ++line_no;
  const auto header = split(line);
  if (header.size() != 3 || header[0] != "x" || header[1] != "y" || header[2] != "z")
    throw CsvError("line 1: header must be x,y,z", 1);
  std::vector<Point> points;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 3) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected 3 fields, got " << fields.size();
      throw CsvError(msg.str(), line_no);
    }
    points.push_back({parse_number(fields[0], "x", line_no), parse_number(fields[1], "y", line_no)});
    values.push_back(parse_number(fields[2], "z", line_no));
  }
  return DataSet::from(std::move(points), std::move(values));
}

DataSet read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_points_csv(in);
}

std::vector<Point> parse_eval_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("line 1: missing header x,y", 1);
  const auto header = split(line);
  const bool with_z = header.size() == 3 && header[2] == "z";
  if ((header.size() != 2 && !with_z) || header[0] != "x" || header[1] != "y")
    throw CsvError("line 1: header must be x,y or x,y,z", 1);
  std::vector<Point> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << header.size() << " fields, got "
          << fields.size();
      throw CsvError(msg.str(), line_no);
    }
    points.push_back({parse_number(fields[0], "x", line_no), parse_number(fields[1], "y", line_no)});
  }
  return points;
}

std::vector<Point> read_eval_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_eval_points_csv(in);
}

void write_field_csv(std::ostream& out, const Grid& grid, const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != grid.node_count())
    throw ShapeMismatch("field length does not match the grid node count");
  const auto old = out.precision(17);
  out << "x,y,u\n";
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.node(k);
    out << p.x << ',' << p.y << ',' << values[static_cast<Eigen::Index>(k)] << '\n';
  }
  out.precision(old);
}

void write_field_csv(const std::filesystem::path& path, const Grid& grid, const Vector& values) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_field_csv(out, grid, values);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_values_csv(std::ostream& out, const std::vector<Point>& points, const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != points.size())
    throw ShapeMismatch("value count does not match the point count");
  const auto old = out.precision(17);
  out << "x,y,u\n";
  for (std::size_t k = 0; k < points.size(); ++k)
    out << points[k].x << ',' << points[k].y << ',' << values[static_cast<Eigen::Index>(k)] << '\n';
  out.precision(old);
}

}  // namespace lspline
