#include "mavdet/detection_log.hpp"

#include <fstream>

#include <json.hpp>

#include "mavdet/error.hpp"

namespace mavdet {

namespace {

std::string box_fields(const Box& b) {
  return "\"x\":" + format_number(b.x) + ",\"y\":" + format_number(b.y) + ",\"w\":" + format_number(b.w) +
         ",\"h\":" + format_number(b.h);
}

}  // namespace

std::string format_log_line(const FrameResult& r, bool timing) {
  std::string s = "{\"frame\":" + std::to_string(r.frame) + ",\"mode\":\"" + to_string(r.mode_before) + "\",\"det\":";
  if (r.detection) {
    s += "{" + box_fields(r.detection->box) + ",\"conf\":" + format_number(r.detection->confidence) +
         ",\"source\":\"" + to_string(r.detection->source) + "\"}";
  } else {
    s += "null";
  }
  s += ",\"region\":";
  s += r.region ? "{" + box_fields(*r.region) + "}" : std::string("null");
  s += ",\"ms\":{";
  if (timing) {
    bool first = true;
    for (const auto& [name, ms] : r.latency_ms) {
      s += (first ? "\"" : ",\"") + name + "\":" + format_number(ms);
      first = false;
    }
    s += (first ? "\"total\":" : ",\"total\":") + format_number(r.total_ms);
  }
  s += "}}";
  return s;
}

Predictions parse_detection_log(std::istream& in) {
  Predictions out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const int frame = j.at("frame").get<int>();
      auto& dets = out[frame];
      const auto& d = j.at("det");
      if (d.is_null()) continue;
      Detection det;
      det.box = {d.at("x").get<double>(), d.at("y").get<double>(), d.at("w").get<double>(), d.at("h").get<double>()};
      det.confidence = d.at("conf").get<double>();
      const auto src = parse_source(d.at("source").get<std::string>());
      if (!src) throw Error(ErrorCode::parse_error, "unknown source");
      det.source = *src;
      dets.push_back(det);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse_error, "detection log line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::parse_error, "detection log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Predictions read_detection_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return parse_detection_log(in);
}

}  // namespace mavdet
