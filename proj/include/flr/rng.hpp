#ifndef FLR_RNG_HPP
#define FLR_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace flr {

/// What a stream is drawing; part of the stream key so that, e.g., the
/// noisy-discrete arm can replay the predictor draws of the continuous arm.
enum class StreamRole : std::uint64_t {
  predictor = 1,
  regression_noise = 2,
  observation_noise = 3,
};

/// Deterministic random stream keyed by (master seed, replicate, role).
/// Uses the fully specified mt19937_64 engine and a hand-rolled Box-Muller
/// transform, so sequences are identical across standard libraries; results
/// therefore do not depend on replicate execution order or thread count.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replicate, StreamRole role)
      : engine_(mix(mix(mix(master_seed) ^ replicate) ^
                    static_cast<std::uint64_t>(role))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached within the stream.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double sd) { return sd * normal(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace flr

#endif  // FLR_RNG_HPP
