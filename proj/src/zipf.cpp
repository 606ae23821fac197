#include "hotlock/zipf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hotlock {

ZipfSampler::ZipfSampler(std::uint64_t n, double skew) : n_(n), skew_(skew) {
  if (n == 0) throw std::invalid_argument("zipf: n must be at least 1");
  if (!(skew >= 0.0)) throw std::invalid_argument("zipf: skew must be non-negative");
  if (skew == 0.0 || n == 1) return;
  cdf_.resize(n);
  double acc = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    acc += std::pow(static_cast<double>(k + 1), -skew);
    cdf_[k] = acc;
  }
  for (auto& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::uint64_t ZipfSampler::index_for(double u) const {
  if (cdf_.empty()) return std::min<std::uint64_t>(static_cast<std::uint64_t>(u * n_), n_ - 1);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::uint64_t>(it - cdf_.begin());
}

double ZipfSampler::probability(std::uint64_t k) const {
  if (k >= n_) return 0.0;
  if (cdf_.empty()) return 1.0 / static_cast<double>(n_);
  return k == 0 ? cdf_[0] : cdf_[k] - cdf_[k - 1];
}

}  // namespace hotlock
