#include "pdl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdl/assignment.hpp"
#include "pdl/errors.hpp"

namespace pdl {

EmpiricalMeasure::EmpiricalMeasure(Mat points) : points_(std::move(points)) {
  if (points_.cols() < 1 || points_.rows() < 1) throw DomainError("EmpiricalMeasure: empty measure");
  if (!points_.allFinite()) throw DomainError("EmpiricalMeasure: non-finite point");
}

EmpiricalMeasure EmpiricalMeasure::from_1d(const std::vector<double>& values) {
  Mat p(1, static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) p(0, static_cast<Index>(i)) = values[i];
  return EmpiricalMeasure(std::move(p));
}

void WeightedNorm::validate(Index dim) const {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("WeightedNorm: weights must be positive");
  if (split < 0 || split > dim) throw DimensionError("WeightedNorm: split index outside dimension");
}

namespace {

std::vector<double> sorted_row(const EmpiricalMeasure& mu) {
  std::vector<double> v(mu.points().data(), mu.points().data() + mu.size());
  std::sort(v.begin(), v.end());
  return v;
}

// Empirical quantile at level u, interpolating order statistics placed at
// levels (i + 0.5) / n.
double quantile(const std::vector<double>& s, double u) {
  const double pos = u * static_cast<double>(s.size()) - 0.5;
  if (pos <= 0.0) return s.front();
  const auto last = static_cast<double>(s.size() - 1);
  if (pos >= last) return s.back();
  const auto i = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * s[i] + t * s[i + 1];
}

}  // namespace

double w2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("w2_1d: measures must be one-dimensional");
  const auto a = sorted_row(mu), b = sorted_row(nu);
  double acc = 0.0;
  if (a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc / static_cast<double>(a.size()));
  }
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double diff = quantile(a, u) - quantile(b, u);
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double w2_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const std::optional<WeightedNorm>& norm,
                Index cap) {
  if (mu.dim() != nu.dim()) throw DimensionError("w2_exact: dimension mismatch");
  if (mu.size() != nu.size()) throw DimensionError("w2_exact: sample counts differ; subsample to equal counts");
  const Index n = mu.size(), dim = mu.dim();
  if (n > cap)
    throw DomainError("w2_exact: " + std::to_string(n) + " points exceed the cap of " + std::to_string(cap) +
                      "; subsample both clouds");
  Vec wts = Vec::Ones(dim);
  if (norm) {
    norm->validate(dim);
    wts.head(norm->split).setConstant(norm->a);
    wts.tail(dim - norm->split).setConstant(norm->b);
  }
  const Mat& P = mu.points();
  const Mat& Q = nu.points();
  Mat cost(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) cost(i, j) = ((P.col(i) - Q.col(j)).array().square() * wts.array()).sum();
  const auto assign = solve_assignment(cost);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) acc += cost(i, assign[static_cast<std::size_t>(i)]);
  return std::sqrt(std::max(0.0, acc / static_cast<double>(n)));
}

Moments moments(const EmpiricalMeasure& mu) {
  if (mu.size() < 2) throw DomainError("moments: covariance needs at least 2 points");
  Moments m;
  m.mean = mu.points().rowwise().mean();
  const Mat c = mu.points().colwise() - m.mean;
  m.cov = c * c.transpose() / static_cast<double>(mu.size() - 1);
  return m;
}

Vec coordinate_variance(const Mat& samples) {
  if (samples.cols() < 2) throw DomainError("coordinate_variance: needs at least 2 samples");
  const Vec mean = samples.rowwise().mean();
  return (samples.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(samples.cols() - 1);
}

ImageGrid pixelwise_variance(const SampleStore& store, Index width, Index height, Index offset) {
  const Index n = width * height;
  if (width < 1 || height < 1 || offset < 0 || offset + n > store.d())
    throw DimensionError("pixelwise_variance: image shape does not fit the samples");
  if (store.n_samples() < 2) throw DomainError("pixelwise_variance: needs at least 2 samples");
  Vec sum = Vec::Zero(n), sq = Vec::Zero(n);
  // Shifted accumulation against the first sample for stability.
  const Vec ref = store.x(0, 0).segment(offset, n);
  for (std::size_t r = 0; r < store.n_records(); ++r)
    for (std::size_t c = 0; c < store.n_chains(); ++c) {
      const Vec dlt = store.x(r, c).segment(offset, n) - ref;
      sum += dlt;
      sq += dlt.cwiseProduct(dlt);
    }
  const double N = static_cast<double>(store.n_samples());
  const Vec var = ((sq - sum.cwiseProduct(sum) / N) / (N - 1.0)).cwiseMax(0.0);
  return ImageGrid::from_vector(width, height, var);
}

double psnr(const ImageGrid& reference, const ImageGrid& estimate, double peak) {
  if (reference.width != estimate.width || reference.height != estimate.height)
    throw DimensionError("psnr: image shapes differ");
  if (!(peak > 0.0)) throw DomainError("psnr: peak must be positive");
  const double mse = (reference.vec() - estimate.vec()).squaredNorm() / static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse / (peak * peak));
}

}  // namespace pdl
