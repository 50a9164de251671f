#pragma once

#include <istream>
#include <string>

#include "mavdet/evaluation.hpp"
#include "mavdet/pipeline.hpp"

namespace mavdet {

/// One JSON line per frame:
/// {"frame":k,"mode":"global"|"local","det":{x,y,w,h,conf,source}|null,"region":{x,y,w,h}|null,"ms":{...}}.
/// `mode` is the mode the frame was processed in. With `timing` false the
/// "ms" object is written empty so logs compare byte for byte.
std::string format_log_line(const FrameResult& r, bool timing = true);

/// Detections of a log, keyed by frame. Throws parse_error on malformed lines.
Predictions parse_detection_log(std::istream& in);
Predictions read_detection_log(const std::filesystem::path& path);

}  // namespace mavdet
