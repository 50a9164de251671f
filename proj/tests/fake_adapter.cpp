// Scripted stand-in for an external model process.
//   fake_adapter <detector|classifier> <mode> [transcript]
// Modes: normal, error, slow, die, wrong-id, garbage, bad-role, silent.
// With a transcript path, every request header line is appended to it.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

int main(int argc, char** argv) {
  if (argc < 3) return 2;
  const std::string role = argv[1], mode = argv[2];
  std::ofstream transcript;
  if (argc > 3) transcript.open(argv[3], std::ios::app);

  if (mode == "silent") {
    std::this_thread::sleep_for(std::chrono::seconds(5));
    return 0;
  }
  std::cout << "{\"proto\":1,\"role\":\"" << (mode == "bad-role" ? "other" : role) << "\"}\n" << std::flush;

  std::string header;
  while (std::getline(std::cin, header)) {
    if (transcript) transcript << header << '\n' << std::flush;
    nlohmann::json h;
    try {
      h = nlohmann::json::parse(header);
    } catch (...) {
      std::cout << "{\"id\":0,\"error\":\"bad header\"}\n" << std::flush;
      continue;
    }
    const auto id = h.at("id").get<std::uint64_t>();
    const auto bytes = h.at("bytes").get<std::size_t>();
    std::vector<unsigned char> pixels(bytes);
    if (!std::cin.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(bytes))) return 3;

    if (mode == "die") return 1;
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    if (mode == "error") {
      std::cout << "{\"id\":" << id << ",\"error\":\"model failure\"}\n" << std::flush;
      continue;
    }
    if (mode == "garbage") {
      std::cout << "not json\n" << std::flush;
      continue;
    }
    const std::uint64_t reply_id = mode == "wrong-id" ? id + 1 : id;

    if (role == "detector") {
      // One box whose x encodes the request width, so tests can see the crop.
      const int w = h.at("width").get<int>();
      std::cout << "{\"id\":" << reply_id << ",\"dets\":[{\"x\":" << (w / 4) << ",\"y\":2,\"w\":6,\"h\":5,\"conf\":0.8},"
                << "{\"x\":1,\"y\":1,\"w\":3,\"h\":3,\"conf\":0.2}]}\n"
                << std::flush;
    } else {
      double mean = 0;
      for (unsigned char v : pixels) mean += v;
      mean /= double(pixels.empty() ? 1 : pixels.size());
      std::cout << "{\"id\":" << reply_id << ",\"label\":\"" << (mean >= 128 ? "mav" : "clutter")
                << "\",\"score\":0.75}\n"
                << std::flush;
    }
  }
  return 0;
}
