#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gslac {

// Gaussian deviates via the polar method on top of mt19937_64.
// std::normal_distribution is implementation-defined, so seeded runs would
// not be reproducible across standard libraries; this stream is fully
// specified by the seed.
class GaussianDeviate {
 public:
  explicit GaussianDeviate(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Uniform in (0,1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gslac
