#ifndef ELDPP_RANDOM_HPP
#define ELDPP_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace eldpp {

/// Seeded 64-bit Mersenne twister. Child streams are derived by hashing
/// (seed, stream id) through std::seed_seq, so parallel chains can each own
/// an independent generator.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  static constexpr std::string_view algorithm() noexcept { return kAlgorithm; }

  Rng split(std::uint64_t stream) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
    Rng child(seed_);
    child.engine_.seed(seq);
    return child;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  bool bernoulli(double prob) { return uniform() < prob; }

  double normal() { return std::normal_distribution<double>()(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace eldpp

#endif  // ELDPP_RANDOM_HPP
