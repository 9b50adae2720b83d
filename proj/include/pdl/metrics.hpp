#pragma once

#include <optional>
#include <vector>

#include "pdl/ensemble.hpp"
#include "pdl/image.hpp"
#include "pdl/types.hpp"

namespace pdl {

// Uniformly weighted point cloud; points are columns.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(Mat points);
  static EmpiricalMeasure from_1d(const std::vector<double>& values);

  Index dim() const { return points_.rows(); }
  Index size() const { return points_.cols(); }
  const Mat& points() const { return points_; }

 private:
  Mat points_;
};

// |(x, y)|^2 = a |x|^2 + b |y|^2 with x the first `split` coordinates.
struct WeightedNorm {
  double a = 1.0;
  double b = 1.0;
  Index split = 0;

  void validate(Index dim) const;
};

inline constexpr Index kDefaultW2Cap = 2000;

// Quantile coupling. Unequal counts are compared at max(n1, n2) common
// quantile levels with linear interpolation.
double w2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Exact optimal assignment under the squared (weighted) norm.
double w2_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                const std::optional<WeightedNorm>& norm = std::nullopt, Index cap = kDefaultW2Cap);

struct Moments {
  Vec mean;
  Mat cov;  // unbiased
};
Moments moments(const EmpiricalMeasure& mu);

// Per-coordinate unbiased variance of the columns of `samples`.
Vec coordinate_variance(const Mat& samples);

// Per-pixel variance of primal coordinates [offset, offset + w*h).
ImageGrid pixelwise_variance(const SampleStore& store, Index width, Index height, Index offset = 0);

// +infinity when the images are identical.
double psnr(const ImageGrid& reference, const ImageGrid& estimate, double peak = 1.0);

}  // namespace pdl
