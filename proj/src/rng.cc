#include "wban/rng.h"

#include <stdexcept>

namespace wban {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose,
                     std::uint64_t index) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(a ^ (static_cast<std::uint64_t>(purpose) << 32));
  const std::uint64_t c = mix64(b ^ index);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  gen_.seed(seq);
}

double RngStream::uniform01() {
  ++draws_;
  return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
}

double RngStream::normal(double mean, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("normal: sigma must be >= 0");
  ++draws_;
  if (sigma == 0.0) return mean;
  return std::normal_distribution<double>(mean, sigma)(gen_);
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be >= 1");
  ++draws_;
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
}

bool RngStream::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("bernoulli: p must lie in [0, 1]");
  return uniform01() < p;
}

}  // namespace wban
