#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ghp {

// Per-dimension running mean/std of network inputs (Welford accumulation).
// A fresh normalizer acts as the identity (mean 0, std 1).
class Normalizer {
 public:
  explicit Normalizer(std::size_t dim = 0) { reset(dim); }

  void reset(std::size_t dim);
  void absorb(std::span<const double> x);
  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }

  double mean(std::size_t i) const;
  double stddev(std::size_t i) const;  // floored at 1e-6

  void normalize(std::span<const double> in, std::span<double> out) const;
  void denormalize(std::span<const double> in, std::span<double> out) const;

  // serialization access
  const std::vector<double>& raw_mean() const { return mean_; }
  const std::vector<double>& raw_m2() const { return m2_; }
  void restore(std::vector<double> mean, std::vector<double> m2, std::size_t count);

  static constexpr double kStdFloor = 1e-6;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> mean_, m2_;
};

}  // namespace ghp
