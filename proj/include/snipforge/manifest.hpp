// Run manifest written by every subcommand: config snapshot, seed, stage
// timings and content digests of every input and output file.
#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "snipforge/util.hpp"

namespace snipforge::cli {

class RunManifest {
 public:
  RunManifest(std::string stage, nlohmann::json config_snapshot, uint64_t seed)
      : stage_(std::move(stage)), config_(std::move(config_snapshot)), seed_(seed) {
    start_ = std::chrono::steady_clock::now();
  }

  void add_input(const std::string& path) { inputs_.push_back(digest_entry(path)); }
  void add_output(const std::string& path) { outputs_.push_back(digest_entry(path)); }
  void mark(const std::string& label) {
    auto now = std::chrono::steady_clock::now();
    timings_.push_back({label, std::chrono::duration_cast<std::chrono::milliseconds>(now - start_).count()});
  }

  void write(const std::string& path) const {
    nlohmann::json j;
    j["stage"] = stage_;
    j["seed"] = seed_;
    j["config"] = config_;
    j["timings_ms"] = nlohmann::json::object();
    for (const auto& [label, ms] : timings_) j["timings_ms"][label] = ms;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    util::write_file(path, j.dump(2) + "\n");
  }

 private:
  static nlohmann::json digest_entry(const std::string& path) {
    return {{"path", path}, {"fnv1a64", util::hex64(util::fnv1a64(util::read_file(path)))}};
  }

  std::string stage_;
  nlohmann::json config_;
  uint64_t seed_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<std::string, int64_t>> timings_;
  std::vector<nlohmann::json> inputs_, outputs_;
};

}  // namespace snipforge::cli
