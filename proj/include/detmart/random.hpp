#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace detmart {

// Counter-based Philox4x32-10. The key is the run seed and the stream id sits
// in the upper half of the counter, so every (seed, path) pair gets its own
// independent stream with no shared state.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream) : key_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (avail_ == 0) refill();
    return buffer_[--avail_];
  }

  // uniform on (0, 1)
  double uniform() { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double th = 6.283185307179586476925 * uniform();
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(*this); }
  long long poisson(double mean) {
    if (mean <= 0) return 0;
    return std::poisson_distribution<long long>(mean)(*this);
  }

 private:
  void refill() {
    std::uint32_t c[4] = {std::uint32_t(counter_), std::uint32_t(counter_ >> 32), std::uint32_t(stream_),
                          std::uint32_t(stream_ >> 32)};
    std::uint32_t k0 = std::uint32_t(key_), k1 = std::uint32_t(key_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
      const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
      const std::uint32_t n0 = std::uint32_t(p1 >> 32) ^ c[1] ^ k0;
      const std::uint32_t n1 = std::uint32_t(p1);
      const std::uint32_t n2 = std::uint32_t(p0 >> 32) ^ c[3] ^ k1;
      const std::uint32_t n3 = std::uint32_t(p0);
      c[0] = n0;
      c[1] = n1;
      c[2] = n2;
      c[3] = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buffer_[0] = (std::uint64_t(c[0]) << 32) | c[1];
    buffer_[1] = (std::uint64_t(c[2]) << 32) | c[3];
    avail_ = 2;
    ++counter_;
  }

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int avail_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detmart
