#pragma once

// Shared fixtures for the test suite.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "probpool/core.hpp"
#include "probpool/rng.hpp"

namespace testutil {

inline probpool::PredictionRow row(std::initializer_list<std::pair<int, double>> entries) {
  probpool::PredictionRow r;
  for (const auto& [expert, prob] : entries) r.set(expert, prob);
  return r;
}

// Random full-participation dataset rows plus Bernoulli(1/2) outcomes.
struct RandomSeason {
  std::vector<probpool::PredictionRow> rows;
  std::vector<int> outcomes;
};

inline RandomSeason random_season(std::size_t n_experts, std::size_t n_games,
                                  std::uint64_t seed) {
  probpool::rng::Stream s(seed);
  RandomSeason out;
  for (std::size_t t = 0; t < n_games; ++t) {
    probpool::PredictionRow r;
    for (std::size_t i = 0; i < n_experts; ++i) {
      r.set(static_cast<int>(i), s.next_unit());
    }
    out.rows.push_back(std::move(r));
    out.outcomes.push_back(s.next_bernoulli(0.5) ? 1 : 0);
  }
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("probpool_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil
