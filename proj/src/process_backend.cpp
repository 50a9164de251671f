#include "mavdet/process_backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <iostream>

#include <json.hpp>

#include "mavdet/error.hpp"

namespace mavdet {
namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left < 0 ? 0 : static_cast<int>(left);
}

void warn(const std::string& msg) { std::cerr << "mavdet: backend: " << msg << '\n'; }

}  // namespace

ChildProcess::ChildProcess(const std::string& command) {
  // A dead child must surface as a write error, not kill the pipeline.
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw Error(ErrorCode::backend_unavailable, "pipe failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorCode::backend_unavailable, "pipe failed");
  }
  pid_ = ::fork();
  if (pid_ < 0) throw Error(ErrorCode::backend_unavailable, "fork failed");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

ChildProcess::~ChildProcess() { terminate(); }

void ChildProcess::terminate() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Give a well-behaved adapter a moment to exit on EOF.
    for (int i = 0; i < 20; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(5000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

bool ChildProcess::write_all(std::span<const std::uint8_t> bytes, int timeout_ms) {
  if (to_child_ < 0) return false;
  const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(to_child_, bytes.data() + done, bytes.size() - done);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) return false;
    pollfd p{to_child_, POLLOUT, 0};
    const int left = remaining_ms(deadline);
    if (left == 0 || ::poll(&p, 1, left) <= 0) return false;
    if (p.revents & (POLLERR | POLLHUP)) return false;
  }
  return true;
}

std::optional<std::string> ChildProcess::read_line(int timeout_ms) {
  const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (from_child_ < 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) return std::nullopt;
    if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) return std::nullopt;
    pollfd p{from_child_, POLLIN, 0};
    const int left = remaining_ms(deadline);
    if (left == 0) return std::nullopt;
    const int r = ::poll(&p, 1, left);
    if (r <= 0) return std::nullopt;
  }
}

std::string encode_request_header(std::uint64_t id, int width, int height) {
  const std::uint64_t bytes = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height) * 3;
  return "{\"id\":" + std::to_string(id) + ",\"width\":" + std::to_string(width) + ",\"height\":" +
         std::to_string(height) + ",\"bytes\":" + std::to_string(bytes) + "}\n";
}

std::string encode_handshake(const std::string& role) { return "{\"proto\":1,\"role\":\"" + role + "\"}\n"; }

Handshake parse_handshake(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    return {j.at("proto").get<int>(), j.at("role").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("handshake: ") + e.what());
  }
}

DetectorReply parse_detector_reply(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    DetectorReply r;
    r.id = j.at("id").get<std::uint64_t>();
    if (j.contains("error")) {
      r.error = j.at("error").get<std::string>();
      return r;
    }
    for (const auto& d : j.at("dets"))
      r.dets.push_back({d.at("x").get<double>(), d.at("y").get<double>(), d.at("w").get<double>(),
                        d.at("h").get<double>(), d.at("conf").get<double>()});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("detector reply: ") + e.what());
  }
}

ClassifierReply parse_classifier_reply(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ClassifierReply r;
    r.id = j.at("id").get<std::uint64_t>();
    if (j.contains("error")) {
      r.error = j.at("error").get<std::string>();
      return r;
    }
    const auto label = j.at("label").get<std::string>();
    if (label != "mav" && label != "clutter") throw Error(ErrorCode::parse_error, "unknown label " + label);
    r.verdict = {label == "mav" ? PatchLabel::mav : PatchLabel::clutter, j.at("score").get<double>()};
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("classifier reply: ") + e.what());
  }
}

ExternalBackend::ExternalBackend(const std::string& command, const std::string& role,
                                 ExternalBackendOptions options)
    : child_(command), options_(options) {
  const auto line = child_.read_line(options_.handshake_timeout_ms);
  if (!line) {
    fail("no handshake from '" + command + "'");
    return;
  }
  try {
    const Handshake h = parse_handshake(*line);
    if (h.proto != 1 || h.role != role) fail("handshake mismatch: " + *line);
  } catch (const Error& e) {
    fail(e.what());
  }
}

void ExternalBackend::fail(const std::string& why) {
  if (!available_) return;
  available_ = false;
  last_error_ = why;
  warn(why + " (degraded mode)");
  child_.terminate();
}

void ExternalBackend::note_error_reply(const std::string& msg) {
  ++error_replies_;
  last_error_ = msg;
  warn("adapter error: " + msg);
}

std::optional<std::string> ExternalBackend::exchange(const RgbImage& image, std::uint64_t& id) {
  if (!available_) return std::nullopt;
  id = next_id_++;
  const std::string header = encode_request_header(id, image.width(), image.height());
  const auto deadline = Clock::now() + std::chrono::milliseconds(options_.request_timeout_ms);
  const std::span<const std::uint8_t> head(reinterpret_cast<const std::uint8_t*>(header.data()), header.size());
  if (!child_.write_all(head, remaining_ms(deadline)) || !child_.write_all(image.pixels(), remaining_ms(deadline))) {
    fail("request " + std::to_string(id) + " could not be written");
    return std::nullopt;
  }
  auto line = child_.read_line(remaining_ms(deadline));
  if (!line) {
    fail("request " + std::to_string(id) + " timed out or adapter exited");
    return std::nullopt;
  }
  return line;
}

ExternalDetector::ExternalDetector(const std::string& command, ExternalBackendOptions options)
    : ExternalBackend(command, "detector", options) {}

std::vector<Detection> ExternalDetector::run(const Frame& frame, const PixelRect& roi) {
  const RgbImage image =
      (roi.x == 0 && roi.y == 0 && roi.w == frame.width() && roi.h == frame.height()) ? frame.rgb
                                                                                      : crop(frame.rgb, roi);
  std::uint64_t id = 0;
  const auto line = exchange(image, id);
  if (!line) return {};
  try {
    const DetectorReply reply = parse_detector_reply(*line);
    if (reply.id != id) {
      fail("reply id " + std::to_string(reply.id) + " for request " + std::to_string(id));
      return {};
    }
    if (reply.error) {
      note_error_reply(*reply.error);
      return {};
    }
    std::vector<Detection> out;
    for (const auto& d : reply.dets)
      if (d.w > 0 && d.h > 0) out.push_back({{d.x, d.y, d.w, d.h}, d.conf, Source::gad});
    return out;
  } catch (const Error& e) {
    fail(e.what());
    return {};
  }
}

ExternalClassifier::ExternalClassifier(const std::string& command, ExternalBackendOptions options)
    : ExternalBackend(command, "classifier", options) {}

PatchVerdict ExternalClassifier::classify(const Patch& patch) {
  std::uint64_t id = 0;
  const auto line = exchange(patch.pixels, id);
  if (!line) return {PatchLabel::mav, 1.0};
  try {
    const ClassifierReply reply = parse_classifier_reply(*line);
    if (reply.id != id) {
      fail("reply id " + std::to_string(reply.id) + " for request " + std::to_string(id));
      return {PatchLabel::mav, 1.0};
    }
    if (reply.error) {
      note_error_reply(*reply.error);
      return {PatchLabel::mav, 1.0};
    }
    return reply.verdict;
  } catch (const Error& e) {
    fail(e.what());
    return {PatchLabel::mav, 1.0};
  }
}

}  // namespace mavdet
