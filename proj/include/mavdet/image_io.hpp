#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mavdet/geometry.hpp"
#include "mavdet/image.hpp"

namespace mavdet {

/// 8- or 16-bit gray, gray+alpha, RGB or RGBA; alpha is dropped.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  /// Next frame in order, or nullopt at the end.
  virtual std::optional<Frame> next() = 0;
  /// Total frames when known up front.
  virtual std::optional<int> size() const { return std::nullopt; }
};

/// PNG files of a directory in lexicographic order.
class DirectorySource final : public FrameSource {
 public:
  explicit DirectorySource(const std::filesystem::path& dir);
  std::optional<Frame> next() override;
  std::optional<int> size() const override { return static_cast<int>(files_.size()); }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t pos_{0};
};

struct RawStreamHeader {
  int width{0};
  int height{0};
  int frames{0};
};

RawStreamHeader parse_raw_header(const std::string& line);
std::string encode_raw_header(const RawStreamHeader& h);

/// A JSON header line {"width":W,"height":H,"frames":N} followed by N*W*H*3
/// RGB bytes.
class RawStreamSource final : public FrameSource {
 public:
  explicit RawStreamSource(std::istream& in);
  explicit RawStreamSource(const std::filesystem::path& path);
  std::optional<Frame> next() override;
  std::optional<int> size() const override { return header_.frames; }
  const RawStreamHeader& header() const { return header_; }

 private:
  void read_header();

  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  RawStreamHeader header_;
  int read_{0};
};

/// "-" reads a raw stream from stdin, a directory is a PNG sequence and any
/// other path a raw stream file.
std::unique_ptr<FrameSource> open_frame_source(const std::string& input);

using Color = std::array<std::uint8_t, 3>;

/// Rectangle outline, clipped to the image.
void draw_box(RgbImage& image, const Box& box, const Color& color, int thickness = 2);

}  // namespace mavdet
