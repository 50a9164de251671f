#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mavdet/error.hpp"
#include "mavdet/image.hpp"
#include "mavdet/image_io.hpp"

using namespace mavdet;
namespace fs = std::filesystem;

namespace {

RgbImage random_rgb(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> v(0, 255);
  RgbImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(v(rng));
  return img;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mavdet_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("grayscale of black, white, red and gray pixels") {
  RgbImage img(4, 1);
  const std::uint8_t px[4][3] = {{0, 0, 0}, {255, 255, 255}, {255, 0, 0}, {77, 77, 77}};
  for (int x = 0; x < 4; ++x)
    for (int c = 0; c < 3; ++c) img(x, 0, c) = px[x][c];
  const GrayImage g = to_grayscale(img);
  CHECK(g(0, 0) == 0);
  CHECK(g(1, 0) == 255);
  CHECK(g(2, 0) == 76);
  CHECK(g(3, 0) == 77);
}

TEST_CASE("grayscale matches the rounded luma formula") {
  const RgbImage img = random_rgb(64, 32, 2);
  const GrayImage g = to_grayscale(img);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double luma = 0.299 * img(x, y, 0) + 0.587 * img(x, y, 1) + 0.114 * img(x, y, 2);
      REQUIRE(std::abs(g(x, y) - luma) <= 0.5 + 1e-9);
    }
}

TEST_CASE("grayscale is the identity on gray input") {
  std::mt19937_64 rng(5);
  GrayImage g(17, 9);
  for (auto& p : g.pixels()) p = static_cast<std::uint8_t>(rng() & 0xff);
  CHECK(to_grayscale(gray_to_rgb(g)) == g);
}

TEST_CASE("crop copies the rectangle and rejects outside rectangles") {
  const RgbImage img = random_rgb(20, 10, 3);
  const RgbImage c = crop(img, PixelRect{4, 2, 5, 3});
  CHECK(c.width() == 5);
  CHECK(c.height() == 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x)
      for (int ch = 0; ch < 3; ++ch) CHECK(c(x, y, ch) == img(x + 4, y + 2, ch));
  CHECK_THROWS_AS(crop(img, PixelRect{18, 0, 5, 3}), Error);
  CHECK_THROWS_AS(crop(img, PixelRect{0, 0, 0, 3}), Error);
}

TEST_CASE("plane size checks") {
  CHECK_THROWS_AS(GrayImage(-1, 3), Error);
  CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>(3)), Error);
}

TEST_CASE("bilinear sampling interpolates between pixel centers") {
  FloatImage f(2, 2);
  f(0, 0) = 0, f(1, 0) = 10, f(0, 1) = 20, f(1, 1) = 30;
  CHECK(sample_bilinear(f, 0, 0) == 0.0f);
  CHECK(sample_bilinear(f, 0.5, 0) == doctest::Approx(5));
  CHECK(sample_bilinear(f, 0.5, 0.5) == doctest::Approx(15));
  CHECK(sample_bilinear(f, -3, 5) == doctest::Approx(20));
}

TEST_CASE("resampling a box of its own size is a copy") {
  const RgbImage img = random_rgb(40, 30, 4);
  const RgbImage r = resample_bilinear(img, Box{5, 6, 32, 20}, 32, 20);
  CHECK(r == crop(img, PixelRect{5, 6, 32, 20}));
}

TEST_CASE("constant images are detected") {
  CHECK(is_constant(GrayImage(5, 5, 9)));
  GrayImage g(5, 5, 9);
  g(2, 3) = 10;
  CHECK_FALSE(is_constant(g));
}

TEST_CASE("PNG round trip for RGB and gray") {
  const fs::path dir = scratch_dir("png");
  const RgbImage img = random_rgb(23, 11, 6);
  write_png(dir / "a.png", img);
  CHECK(read_png(dir / "a.png") == img);

  GrayImage g(9, 4);
  for (int i = 0; i < 36; ++i) g.pixels()[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i * 7);
  write_png(dir / "g.png", g);
  CHECK(to_grayscale(read_png(dir / "g.png")) == g);

  std::ofstream(dir / "bad.png") << "not an image";
  CHECK_THROWS_AS(read_png(dir / "bad.png"), Error);
  CHECK_THROWS_AS(read_png(dir / "missing.png"), Error);
  fs::remove_all(dir);
}

TEST_CASE("directory source yields PNGs in name order") {
  const fs::path dir = scratch_dir("dir");
  for (int i : {2, 0, 1}) {
    char name[16];
    std::snprintf(name, sizeof name, "%06d.png", i);
    write_png(dir / name, RgbImage(4, 3, static_cast<std::uint8_t>(10 * i)));
  }
  std::ofstream(dir / "notes.txt") << "ignored";
  DirectorySource src(dir);
  REQUIRE(src.size() == 3);
  for (int i = 0; i < 3; ++i) {
    auto f = src.next();
    REQUIRE(f);
    CHECK(f->index == i);
    CHECK(f->rgb(0, 0, 0) == 10 * i);
  }
  CHECK_FALSE(src.next());
  fs::remove_all(dir);
  CHECK_THROWS_AS(DirectorySource{dir}, Error);
}

TEST_CASE("raw stream header and frames") {
  const RgbImage a = random_rgb(5, 4, 8), b = random_rgb(5, 4, 9);
  std::string data = encode_raw_header({5, 4, 2});
  CHECK(data == "{\"width\":5,\"height\":4,\"frames\":2}\n");
  data.append(reinterpret_cast<const char*>(a.row(0)), a.pixels().size());
  data.append(reinterpret_cast<const char*>(b.row(0)), b.pixels().size());
  std::istringstream in(data);
  RawStreamSource src(in);
  CHECK(src.size() == 2);
  CHECK(src.next()->rgb == a);
  const auto second = src.next();
  CHECK(second->index == 1);
  CHECK(second->rgb == b);
  CHECK_FALSE(src.next());
}

TEST_CASE("raw stream errors") {
  CHECK_THROWS_AS(parse_raw_header("{\"width\":0,\"height\":4,\"frames\":1}"), Error);
  CHECK_THROWS_AS(parse_raw_header("not json"), Error);
  std::istringstream truncated(encode_raw_header({5, 4, 1}) + "abc");
  RawStreamSource src(truncated);
  CHECK_THROWS_AS(src.next(), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(RawStreamSource{empty}, Error);
}

TEST_CASE("draw_box outlines and clips") {
  RgbImage img(10, 10);
  draw_box(img, Box{2, 3, 4, 5}, {255, 0, 0}, 1);
  CHECK(img(2, 3, 0) == 255);
  CHECK(img(5, 7, 0) == 255);
  CHECK(img(3, 4, 0) == 0);
  CHECK(img(6, 3, 0) == 0);
  draw_box(img, Box{-5, -5, 30, 30}, {0, 255, 0}, 3);
  CHECK(img(0, 0, 1) == 0);
}
