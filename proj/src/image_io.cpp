#include "mavdet/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <png.h>
#include <json.hpp>

#include "mavdet/error.hpp"

namespace mavdet {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return f;
}

void write_rows(const std::filesystem::path& path, int width, int height, int color_type,
                const std::vector<png_bytep>& rows) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::io_error, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::io_error, "cannot encode " + path.string());
  }
  png_init_io(png, f.get());
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage read_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw Error(ErrorCode::parse_error, path.string() + " is not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::io_error, "libpng initialization failed");
  }
  RgbImage img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::parse_error, "corrupt PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::parse_error, "unsupported PNG layout in " + path.string());
  }
  img = RgbImage(width, height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = img.row(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(image.row(y));
  write_rows(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, rows);
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(image.row(y));
  write_rows(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, rows);
}

DirectorySource::DirectorySource(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorCode::io_error, dir.string() + " is not a directory");
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".png") files_.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::io_error, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files_.begin(), files_.end());
}

std::optional<Frame> DirectorySource::next() {
  if (pos_ >= files_.size()) return std::nullopt;
  const int index = static_cast<int>(pos_);
  return Frame{index, read_png(files_[pos_++])};
}

RawStreamHeader parse_raw_header(const std::string& line) {
  RawStreamHeader h;
  try {
    const auto j = nlohmann::json::parse(line);
    h.width = j.at("width").get<int>();
    h.height = j.at("height").get<int>();
    h.frames = j.at("frames").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("bad raw stream header: ") + e.what());
  }
  if (h.width <= 0 || h.height <= 0 || h.frames < 0)
    throw Error(ErrorCode::invalid_dimensions, "raw stream header has invalid dimensions");
  return h;
}

std::string encode_raw_header(const RawStreamHeader& h) {
  return "{\"width\":" + std::to_string(h.width) + ",\"height\":" + std::to_string(h.height) +
         ",\"frames\":" + std::to_string(h.frames) + "}\n";
}

RawStreamSource::RawStreamSource(std::istream& in) : in_(&in) { read_header(); }

RawStreamSource::RawStreamSource(const std::filesystem::path& path)
    : owned_(std::make_unique<std::ifstream>(path, std::ios::binary)), in_(owned_.get()) {
  if (!*in_) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  read_header();
}

void RawStreamSource::read_header() {
  std::string line;
  if (!std::getline(*in_, line)) throw Error(ErrorCode::parse_error, "raw stream is missing its header line");
  header_ = parse_raw_header(line);
}

std::optional<Frame> RawStreamSource::next() {
  if (read_ >= header_.frames) return std::nullopt;
  RgbImage img(header_.width, header_.height);
  const auto bytes = static_cast<std::streamsize>(img.pixels().size());
  in_->read(reinterpret_cast<char*>(img.row(0)), bytes);
  if (in_->gcount() != bytes)
    throw Error(ErrorCode::io_error, "raw stream ended inside frame " + std::to_string(read_));
  return Frame{read_++, std::move(img)};
}

std::unique_ptr<FrameSource> open_frame_source(const std::string& input) {
  if (input == "-") return std::make_unique<RawStreamSource>(std::cin);
  std::error_code ec;
  if (std::filesystem::is_directory(input, ec)) return std::make_unique<DirectorySource>(input);
  if (!std::filesystem::exists(input, ec)) throw Error(ErrorCode::io_error, "input not found: " + input);
  return std::make_unique<RawStreamSource>(std::filesystem::path(input));
}

void draw_box(RgbImage& image, const Box& box, const Color& color, int thickness) {
  const int x0 = static_cast<int>(std::floor(box.x)), y0 = static_cast<int>(std::floor(box.y));
  const int x1 = static_cast<int>(std::ceil(box.right())) - 1, y1 = static_cast<int>(std::ceil(box.bottom())) - 1;
  const auto put = [&](int x, int y) {
    if (!image.inside(x, y)) return;
    for (int c = 0; c < 3; ++c) image(x, y, c) = color[static_cast<std::size_t>(c)];
  };
  for (int t = 0; t < thickness; ++t) {
    for (int x = x0 - t; x <= x1 + t; ++x) put(x, y0 - t), put(x, y1 + t);
    for (int y = y0 - t; y <= y1 + t; ++y) put(x0 - t, y), put(x1 + t, y);
  }
}

}  // namespace mavdet
