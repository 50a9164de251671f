#pragma once

#include <sys/types.h>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mavdet/appearance.hpp"

namespace mavdet {

/// Child process connected through its stdin/stdout.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// False on timeout or a closed pipe.
  bool write_all(std::span<const std::uint8_t> bytes, int timeout_ms);
  /// One line without the trailing newline; nullopt on timeout or EOF.
  std::optional<std::string> read_line(int timeout_ms);
  void terminate();
  bool running() const { return pid_ > 0; }

 private:
  pid_t pid_{-1};
  int to_child_{-1};
  int from_child_{-1};
  std::string buffer_;
};

// Wire format. Every message is one JSON line; a request header is followed
// by exactly width*height*3 bytes of row-major RGB.

struct Handshake {
  int proto{0};
  std::string role;
};

struct WireDetection {
  double x, y, w, h, conf;
};

struct DetectorReply {
  std::uint64_t id{0};
  std::vector<WireDetection> dets;
  std::optional<std::string> error;
};

struct ClassifierReply {
  std::uint64_t id{0};
  PatchVerdict verdict;
  std::optional<std::string> error;
};

/// `{"id":<id>,"width":W,"height":H,"bytes":W*H*3}\n`
std::string encode_request_header(std::uint64_t id, int width, int height);
std::string encode_handshake(const std::string& role);
Handshake parse_handshake(const std::string& line);
DetectorReply parse_detector_reply(const std::string& line);
ClassifierReply parse_classifier_reply(const std::string& line);

struct ExternalBackendOptions {
  int request_timeout_ms = 500;
  int handshake_timeout_ms = 10000;
};

/// Common request/response plumbing. Any timeout, pipe failure, or protocol
/// violation marks the backend unavailable for the rest of the run.
class ExternalBackend {
 public:
  ExternalBackend(const std::string& command, const std::string& role, ExternalBackendOptions options);

  bool available() const { return available_; }
  const std::string& last_error() const { return last_error_; }
  std::uint64_t requests() const { return next_id_; }
  std::uint64_t error_replies() const { return error_replies_; }

 protected:
  /// Sends one image, returns the reply line or nullopt when unavailable.
  std::optional<std::string> exchange(const RgbImage& image, std::uint64_t& id);
  void fail(const std::string& why);
  void note_error_reply(const std::string& msg);

 private:
  ChildProcess child_;
  ExternalBackendOptions options_;
  bool available_{true};
  std::string last_error_;
  std::uint64_t next_id_{0};
  std::uint64_t error_replies_{0};
};

class ExternalDetector final : public AppearanceDetector, public ExternalBackend {
 public:
  explicit ExternalDetector(const std::string& command, ExternalBackendOptions options = {});
  bool degraded() const override { return !available(); }

 protected:
  std::vector<Detection> run(const Frame& frame, const PixelRect& roi) override;
};

/// Unavailable or erroring classifiers answer mav, so the motion path stays live.
class ExternalClassifier final : public PatchClassifier, public ExternalBackend {
 public:
  explicit ExternalClassifier(const std::string& command, ExternalBackendOptions options = {});
  PatchVerdict classify(const Patch& patch) override;
  bool degraded() const override { return !available(); }
};

}  // namespace mavdet
