#include "ghp/normalizer.hpp"

#include <cmath>
#include <stdexcept>

namespace ghp {

void Normalizer::reset(std::size_t dim) {
  dim_ = dim;
  count_ = 0;
  mean_.assign(dim, 0.0);
  m2_.assign(dim, 0.0);
}

void Normalizer::absorb(std::span<const double> x) {
  if (x.size() != dim_) throw std::invalid_argument("Normalizer: dimension mismatch");
  ++count_;
  for (std::size_t i = 0; i < dim_; ++i) {
    double d = x[i] - mean_[i];
    mean_[i] += d / static_cast<double>(count_);
    m2_[i] += d * (x[i] - mean_[i]);
  }
}

double Normalizer::mean(std::size_t i) const { return count_ ? mean_[i] : 0.0; }

double Normalizer::stddev(std::size_t i) const {
  if (count_ < 2) return 1.0;
  double var = m2_[i] / static_cast<double>(count_);
  double sd = std::sqrt(var);
  return sd < kStdFloor ? kStdFloor : sd;
}

void Normalizer::normalize(std::span<const double> in, std::span<double> out) const {
  for (std::size_t i = 0; i < dim_; ++i) out[i] = (in[i] - mean(i)) / stddev(i);
}

void Normalizer::denormalize(std::span<const double> in, std::span<double> out) const {
  for (std::size_t i = 0; i < dim_; ++i) out[i] = in[i] * stddev(i) + mean(i);
}

void Normalizer::restore(std::vector<double> mean, std::vector<double> m2, std::size_t count) {
  if (mean.size() != dim_ || m2.size() != dim_)
    throw std::invalid_argument("Normalizer: restore dimension mismatch");
  mean_ = std::move(mean);
  m2_ = std::move(m2);
  count_ = count;
}

}  // namespace ghp
