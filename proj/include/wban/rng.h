#pragma once

#include <cstdint>
#include <random>

namespace wban {

/// What a random stream is used for. Each purpose (and each node within a
/// purpose) owns an independent generator, so extra draws in one place never
/// shift the realizations seen elsewhere.
enum class StreamPurpose : std::uint32_t {
  kChannel = 1,
  kMac = 2,
  kStrategy = 3,
  kSource = 4,
  kTest = 99,
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0);

  double uniform01();
  /// Throws std::invalid_argument when sigma < 0.
  double normal(double mean, double sigma);
  /// Uniform on {0, ..., n-1}. Throws when n == 0.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Throws unless 0 <= p <= 1.
  bool bernoulli(double p);

  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 gen_;
  std::uint64_t draws_ = 0;
};

/// splitmix64 finalizer; used to derive well-separated seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace wban
