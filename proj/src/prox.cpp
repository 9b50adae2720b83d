#include "pdl/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdl/errors.hpp"

namespace pdl {

namespace {

void require_finite(ConstVecRef v, const char* what) {
  if (!v.allFinite()) throw DomainError(std::string(what) + ": non-finite input");
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
}

void require_step(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("prox step gamma must be >= 0");
}

void clamp_kernel(ConstVecRef v, double alpha, VecRef out) {
  out = v.cwiseMax(-alpha).cwiseMin(alpha);
}

void ball_kernel(ConstVecRef v, double alpha, Index g, VecRef out) {
  const Index groups = v.size() / g;
  for (Index i = 0; i < groups; ++i) {
    double sq = 0.0;
    for (Index j = 0; j < g; ++j) sq += v[i * g + j] * v[i * g + j];
    const double a2 = alpha * alpha;
    const double s = sq > a2 ? alpha / std::sqrt(sq) : 1.0;
    for (Index j = 0; j < g; ++j) out[i * g + j] = s * v[i * g + j];
  }
}

}  // namespace

ProxOperator::ProxOperator(std::string label, double modulus, Kernel kernel, Index dim)
    : label_(std::move(label)), modulus_(modulus), kernel_(std::move(kernel)), dim_(dim) {
  if (!(modulus_ >= 0.0)) throw DomainError("prox modulus must be >= 0");
}

Vec ProxOperator::operator()(ConstVecRef v, double gamma) const {
  if (!kernel_) throw Error("empty ProxOperator");
  if (dim_ >= 0 && v.size() != dim_)
    throw DimensionError(label_ + ": expected dimension " + std::to_string(dim_) + ", got " + std::to_string(v.size()));
  require_finite(v, label_.c_str());
  require_step(gamma);
  Vec out(v.size());
  kernel_(v, gamma, out);
  return out;
}

Vec prox_scaled_square(ConstVecRef v, double gamma, double c) {
  require_positive(c, "c");
  require_step(gamma);
  require_finite(v, "prox_scaled_square");
  return v / (1.0 + gamma / c);
}

Vec prox_quadratic_data(ConstVecRef v, double gamma, ConstVecRef target, double var) {
  require_positive(var, "var");
  require_step(gamma);
  if (v.size() != target.size()) throw DimensionError("prox_quadratic_data: v and target differ in size");
  require_finite(v, "prox_quadratic_data");
  require_finite(target, "prox_quadratic_data target");
  const double r = gamma / var;
  return (v + r * target) / (1.0 + r);
}

Vec project_interval(ConstVecRef v, double alpha) {
  require_positive(alpha, "alpha");
  require_finite(v, "project_interval");
  Vec out(v.size());
  clamp_kernel(v, alpha, out);
  return out;
}

Vec project_l2_ball_groups(ConstVecRef v, double alpha, Index group_size) {
  require_positive(alpha, "alpha");
  if (group_size < 1 || v.size() % group_size != 0)
    throw DimensionError("project_l2_ball_groups: size " + std::to_string(v.size()) +
                         " is not a multiple of group size " + std::to_string(group_size));
  require_finite(v, "project_l2_ball_groups");
  Vec out(v.size());
  ball_kernel(v, alpha, group_size, out);
  return out;
}

Vec prox_via_moreau(const ProxOperator& fstar_prox, ConstVecRef v, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("prox_via_moreau: gamma must be > 0");
  const Vec scaled = v / gamma;
  return v - gamma * fstar_prox(scaled, 1.0 / gamma);
}

ProxOperator scaled_square_prox(double c) {
  require_positive(c, "c");
  return ProxOperator("scaled_square", 1.0 / c, [c](ConstVecRef v, double gamma, VecRef out) {
    out = v / (1.0 + gamma / c);
  });
}

ProxOperator quadratic_data_prox(Vec target, double var) {
  require_positive(var, "var");
  require_finite(target, "quadratic_data target");
  const Index n = target.size();
  return ProxOperator(
      "quadratic_data", 1.0 / var,
      [t = std::move(target), var](ConstVecRef v, double gamma, VecRef out) {
        const double r = gamma / var;
        const double s = 1.0 / (1.0 + r);
        out = s * v + (s * r) * t;
      },
      n);
}

ProxOperator interval_projection(double alpha) {
  require_positive(alpha, "alpha");
  return ProxOperator("interval_projection", 0.0,
                      [alpha](ConstVecRef v, double, VecRef out) { clamp_kernel(v, alpha, out); });
}

ProxOperator group_ball_projection(double alpha, Index group_size) {
  require_positive(alpha, "alpha");
  if (group_size < 1) throw DimensionError("group size must be >= 1");
  return ProxOperator("group_ball_projection", 0.0, [alpha, group_size](ConstVecRef v, double, VecRef out) {
    if (v.size() % group_size != 0) throw DimensionError("group_ball_projection: size not a multiple of group size");
    ball_kernel(v, alpha, group_size, out);
  });
}

ProxOperator identity_prox() {
  return ProxOperator("zero", 0.0, [](ConstVecRef v, double, VecRef out) { out = v; });
}

ProxOperator block_prox(std::vector<std::pair<ProxOperator, Index>> blocks) {
  if (blocks.empty()) throw DimensionError("block_prox: no blocks");
  double modulus = std::numeric_limits<double>::infinity();
  Index total = 0;
  std::string label = "block(";
  for (const auto& [p, n] : blocks) {
    if (n < 1) throw DimensionError("block_prox: block size must be >= 1");
    if (p.dim() >= 0 && p.dim() != n) throw DimensionError("block_prox: block size disagrees with prox dimension");
    modulus = std::min(modulus, p.modulus());
    total += n;
    label += (label.size() > 6 ? "," : "") + p.label();
  }
  label += ")";
  return ProxOperator(
      label, modulus,
      [blocks = std::move(blocks)](ConstVecRef v, double gamma, VecRef out) {
        Index off = 0;
        for (const auto& [p, n] : blocks) {
          p.apply(v.segment(off, n), gamma, out.segment(off, n));
          off += n;
        }
      },
      total);
}

}  // namespace pdl
