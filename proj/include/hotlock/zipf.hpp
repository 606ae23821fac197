#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hotlock {

/// Draws index k in [0, n) with probability proportional to (k+1)^-skew.
/// Exact inverse-CDF sampling over a precomputed table.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double skew);

  template <typename Rng>
  std::uint64_t operator()(Rng& rng) const {
    if (n_ == 1) return 0;
    if (skew_ == 0.0) return std::uniform_int_distribution<std::uint64_t>(0, n_ - 1)(rng);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return index_for(u);
  }

  std::uint64_t index_for(double u) const;
  double probability(std::uint64_t k) const;
  std::uint64_t size() const { return n_; }
  double skew() const { return skew_; }

 private:
  std::uint64_t n_;
  double skew_;
  std::vector<double> cdf_;  // empty when skew is 0
};

}  // namespace hotlock
