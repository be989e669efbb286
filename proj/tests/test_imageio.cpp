#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lspline/error.hpp"
#include "lspline/imageio.hpp"

using namespace lspline;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lspline_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path file(const std::string& name) const { return dir_ / name; }
  void put(const std::string& name, const std::string& bytes) const {
    std::ofstream(file(name), std::ios::binary) << bytes;
  }
  fs::path dir_;
};

Image random_image(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Image img(rows, cols);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  for (auto& x : img.pixels) x = u(rng);
  return img;
}

}  // namespace

using ImageIo = TempDir;

TEST_F(ImageIo, AsciiPgmDividesByMaxval) {
  put("a.pgm", "P2\n# comment\n2 2\n255\n0 128\n255 64\n");
  const Image img = read_image(file("a.pgm"));
  ASSERT_EQ(img.rows, 2u);
  ASSERT_EQ(img.cols, 2u);
  EXPECT_EQ(img.pixels, (std::vector<double>{0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0}));
}

TEST_F(ImageIo, BinaryAndAsciiAgree) {
  put("a.pgm", "P2\n3 2\n255\n0 10 20\n200 250 255\n");
  put("b.pgm", std::string("P5\n3 2\n255\n") + std::string("\x00\x0a\x14\xc8\xfa\xff", 6));
  EXPECT_EQ(read_image(file("a.pgm")).pixels, read_image(file("b.pgm")).pixels);
  put("c.pgm", "P2\n2 1\n15\n0 15\n");
  EXPECT_EQ(read_image(file("c.pgm")).pixels, (std::vector<double>{0.0, 1.0}));
}

TEST_F(ImageIo, RoundTripWithinQuantization) {
  const Image img = random_image(9, 14, 1);
  for (const char* name : {"r.pgm", "r.png"}) {
    write_image(img, file(name));
    const Image back = read_image(file(name));
    ASSERT_EQ(back.rows, img.rows);
    ASSERT_EQ(back.cols, img.cols);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_LE(std::abs(back.pixels[i] - img.pixels[i]), 1.0 / 510.0 + 1e-15);
  }
}

TEST_F(ImageIo, ConstantHalfBecomes128) {
  write_image(Image(4, 5, 0.5), file("h.pgm"));
  for (double x : read_image(file("h.pgm")).pixels) EXPECT_EQ(x, 128.0 / 255.0);
  Image out_of_range(1, 2);
  out_of_range.pixels = {-0.3, 1.7};
  write_image(out_of_range, file("c.png"));
  EXPECT_EQ(read_image(file("c.png")).pixels, (std::vector<double>{0.0, 1.0}));
}

TEST_F(ImageIo, DistinctErrors) {
  EXPECT_THROW(read_image(file("missing.pgm")), IoError);
  put("x.bmp", "BM0000000000");
  EXPECT_THROW(read_image(file("x.bmp")), UnsupportedFormat);
  put("c.ppm", "P6\n1 1\n255\nabc");
  EXPECT_THROW(read_image(file("c.ppm")), ColorImage);
  put("h.pgm", "P2\nfoo 2\n255\n0 0\n");
  EXPECT_THROW(read_image(file("h.pgm")), CorruptHeader);
  put("z.pgm", "P2\n0 2\n255\n");
  EXPECT_THROW(read_image(file("z.pgm")), CorruptHeader);
  put("s.pgm", std::string("P5\n4 4\n255\n") + "ab");
  EXPECT_THROW(read_image(file("s.pgm")), IoError);
}

TEST(ImageNodes, BijectionWithGridOrder) {
  const Image img = random_image(4, 6, 2);
  const Vector v = image_to_nodes(img);
  const Grid g = make_image_grid(img.rows, img.cols);
  ASSERT_EQ(static_cast<std::size_t>(v.size()), g.node_count());
  for (std::size_t r = 0; r < img.rows; ++r)
    for (std::size_t c = 0; c < img.cols; ++c) EXPECT_EQ(v[static_cast<Eigen::Index>(g.node_index(c, r))], img.at(r, c));
  EXPECT_EQ(nodes_to_image(v, img.rows, img.cols).pixels, img.pixels);
  EXPECT_THROW(nodes_to_image(v, 5, 6), ShapeMismatch);
}

TEST(PointsCsv, ParsesRows) {
  std::istringstream in("x,y,z\n0.1,0.2,3\n0.5, 0.5 ,-1e-2\n1,0,7\n");
  const DataSet d = parse_points_csv(in);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.mask, (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_EQ(d.points[1].x, 0.5);
  EXPECT_EQ(d.values[1], -1e-2);
  EXPECT_EQ(d.values[2], 7.0);
}

TEST(PointsCsv, ErrorsNameTheLine) {
  std::istringstream bad("x,y,z\n0.1,0.2,abc\n");
  try {
    parse_points_csv(bad);
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream short_row("x,y,z\n1,2,3\n4,5\n");
  try {
    parse_points_csv(short_row);
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream no_header("1,2,3\n");
  EXPECT_THROW(parse_points_csv(no_header), CsvError);
}

TEST(EvalCsv, AcceptsOptionalZ) {
  std::istringstream a("x,y\n0.25,0.75\n");
  std::istringstream b("x,y,z\n0.25,0.75,9\n");
  const auto pa = parse_eval_points_csv(a), pb = parse_eval_points_csv(b);
  ASSERT_EQ(pa.size(), 1u);
  ASSERT_EQ(pb.size(), 1u);
  EXPECT_EQ(pa[0].x, pb[0].x);
  EXPECT_EQ(pa[0].y, 0.75);
}

TEST(FieldCsv, HeaderAndNodeOrder) {
  const Grid g = make_image_grid(2, 3);
  Vector u(6);
  u << 0, 1, 2, 3, 4, 5;
  std::ostringstream out;
  write_field_csv(out, g, u);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,u");
  for (std::size_t k = 0; k < 6; ++k) {
    ASSERT_TRUE(std::getline(in, line));
    double x, y, v;
    char c1, c2;
    std::istringstream(line) >> x >> c1 >> y >> c2 >> v;
    EXPECT_EQ(x, g.node(k).x);
    EXPECT_EQ(y, g.node(k).y);
    EXPECT_EQ(v, static_cast<double>(k));
  }
}
