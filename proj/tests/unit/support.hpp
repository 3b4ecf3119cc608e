#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "pathex/util/jsonl.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(PATHEX_TEST_DATA) / rel;
}

inline std::filesystem::path repo_data(const std::string& rel) {
  return std::filesystem::path(PATHEX_REPO_DATA) / rel;
}

inline pathex::Json load_json(const std::string& rel) {
  return pathex::Json::parse(pathex::read_text_file(data_path(rel)));
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("pathex_test_" + std::to_string(::getpid()) + "_" + std::to_string(stamp) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
