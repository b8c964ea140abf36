#pragma once

// Shared plumbing: error taxonomy, deterministic RNG, small file helpers.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace chgh {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// User-facing problems (bad input, bad config). The CLI maps these to exit 1.
class UserError : public std::runtime_error {
 public:
  explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

// Contract violations inside the library. The CLI maps these to exit 2.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG. All distributions are implemented on top of the raw
// 64-bit stream so results are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Box-Muller; two raw draws per call.
  double normal(double mean = 0.0, double stddev = 1.0);
  // Inclusive bounds, rejection sampling (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);

  // Independent child stream; deterministic in (seed, key).
  Rng fork(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Reads a whole file; throws UserError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

// Writes via a temporary file in the same directory and renames into place,
// so a crash never leaves a partial file behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Full-precision decimal formatting that round-trips a double exactly.
std::string format_double(double v);

std::vector<std::string> split(const std::string& s, char delim);
std::string trim(const std::string& s);

}  // namespace chgh
