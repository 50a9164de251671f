#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mavdet/geometry.hpp"

namespace mavdet {

/// Ground-truth boxes keyed by 0-based frame index.
using GroundTruth = std::map<int, std::vector<Box>>;

/// Reads `frame,x,y,w,h` CSV (with header) or JSON lines
/// `{"frame":k,"x":..,"y":..,"w":..,"h":..}`; the format is sniffed from the
/// first non-blank character.
GroundTruth parse_annotations(std::istream& in);
GroundTruth read_annotations(const std::filesystem::path& path);

std::string format_annotations_csv(const GroundTruth& gt);
void write_annotations_csv(const std::filesystem::path& path, const GroundTruth& gt);

/// `video,condition` sidecar.
std::map<std::string, std::string> read_conditions(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace mavdet
