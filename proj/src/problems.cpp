#include "pdl/problems.hpp"

#include <cmath>

#include "pdl/errors.hpp"
#include "pdl/linop.hpp"
#include "pdl/prox.hpp"

namespace pdl {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

VecMap group_l21_subgrad(double alpha, Index group_size) {
  require_positive(alpha, "alpha");
  return [alpha, group_size](ConstVecRef z, VecRef out) {
    const Index groups = z.size() / group_size;
    for (Index i = 0; i < groups; ++i) {
      const auto seg = z.segment(i * group_size, group_size);
      const double nrm = seg.norm();
      if (nrm > 0.0)
        out.segment(i * group_size, group_size) = (alpha / nrm) * seg;
      else
        out.segment(i * group_size, group_size).setZero();
    }
  };
}

TargetSpec tv2pixel_target(const Vec& observation, double sigma_eps, double alpha) {
  if (observation.size() != 2) throw DimensionError("tv2pixel: observation must have two entries");
  require_positive(sigma_eps, "sigma_eps");
  require_positive(alpha, "alpha");
  TargetSpec t;
  t.label = "tv2pixel";
  t.K = diff_pair();
  t.g_prox = quadratic_data_prox(observation, sigma_eps * sigma_eps);
  t.fstar_prox = interval_projection(alpha);
  t.f_subgrad = group_l21_subgrad(alpha, 1);
  const double var = sigma_eps * sigma_eps;
  t.g_grad = [observation, var](ConstVecRef x, VecRef out) { out = (x - observation) / var; };
  return t;
}

TargetSpec tv_image_target(const ImageGrid& noisy, double sigma_eps, double alpha) {
  require_positive(sigma_eps, "sigma_eps");
  require_positive(alpha, "alpha");
  TargetSpec t;
  t.label = "tv_image";
  t.K = grad2d(noisy.width, noisy.height);
  t.g_prox = quadratic_data_prox(noisy.vec(), sigma_eps * sigma_eps);
  t.fstar_prox = group_ball_projection(alpha, 2);
  t.f_subgrad = group_l21_subgrad(alpha, 2);
  return t;
}

TargetSpec tgv_image_target(const ImageGrid& noisy, double sigma_eps, double alpha1, double alpha0) {
  require_positive(sigma_eps, "sigma_eps");
  require_positive(alpha1, "alpha1");
  require_positive(alpha0, "alpha0");
  const Index w = noisy.width, h = noisy.height, n = w * h;
  TargetSpec t;
  t.label = "tgv_image";
  t.K = tgv_block(w, h, sym_grad2d(w, h));
  t.g_prox = block_prox({{quadratic_data_prox(noisy.vec(), sigma_eps * sigma_eps), n}, {identity_prox(), 2 * n}});
  t.fstar_prox = block_prox({{group_ball_projection(alpha1, 2), 2 * n}, {group_ball_projection(alpha0, 3), 3 * n}});
  const VecMap s1 = group_l21_subgrad(alpha1, 2), s0 = group_l21_subgrad(alpha0, 3);
  t.f_subgrad = [s1, s0, n](ConstVecRef z, VecRef out) {
    s1(z.head(2 * n), out.head(2 * n));
    s0(z.segment(2 * n, 3 * n), out.segment(2 * n, 3 * n));
  };
  return t;
}

}  // namespace pdl
