#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <hddrul/dataset.hpp>

namespace fixture {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("hddrul-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline hddrul::Day day(int y, unsigned m, unsigned d) {
  return hddrul::Day{std::chrono::year{y} / m / d};
}

}  // namespace fixture
