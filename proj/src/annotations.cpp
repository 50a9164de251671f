#include "mavdet/annotations.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mavdet/error.hpp"

namespace mavdet {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

void add_box(GroundTruth& gt, int frame, const Box& box, int line_no) {
  if (frame < 0 || !box.valid())
    throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": invalid annotation");
  gt[frame].push_back(box);
}

}  // namespace

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

GroundTruth parse_annotations(std::istream& in) {
  GroundTruth gt;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(t);
        add_box(gt, j.at("frame").get<int>(),
                {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()},
                line_no);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
      }
      continue;
    }
    const auto cells = split_csv(t);
    if (!header_seen) {
      header_seen = true;
      if (cells == std::vector<std::string>{"frame", "x", "y", "w", "h"}) continue;
      throw Error(ErrorCode::parse_error, "expected header 'frame,x,y,w,h'");
    }
    if (cells.size() != 5) throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": need 5 fields");
    const double frame = to_double(cells[0], line_no);
    if (frame != std::floor(frame)) throw Error(ErrorCode::parse_error, "non-integer frame index");
    add_box(gt, static_cast<int>(frame),
            {to_double(cells[1], line_no), to_double(cells[2], line_no), to_double(cells[3], line_no),
             to_double(cells[4], line_no)},
            line_no);
  }
  return gt;
}

GroundTruth read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return parse_annotations(in);
}

std::string format_annotations_csv(const GroundTruth& gt) {
  std::string out = "frame,x,y,w,h\n";
  for (const auto& [frame, boxes] : gt)
    for (const auto& b : boxes)
      out += std::to_string(frame) + "," + format_number(b.x) + "," + format_number(b.y) + "," +
             format_number(b.w) + "," + format_number(b.h) + "\n";
  return out;
}

void write_annotations_csv(const std::filesystem::path& path, const GroundTruth& gt) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << format_annotations_csv(gt);
}

std::map<std::string, std::string> read_conditions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto cells = split_csv(t);
    if (first) {
      first = false;
      if (cells.size() == 2 && cells[0] == "video" && cells[1] == "condition") continue;
    }
    if (cells.size() != 2) throw Error(ErrorCode::parse_error, "conditions rows need 'video,condition'");
    out[cells[0]] = cells[1];
  }
  return out;
}

}  // namespace mavdet
