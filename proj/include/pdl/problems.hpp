#pragma once

#include "pdl/image.hpp"
#include "pdl/samplers.hpp"

namespace pdl {

// g = |x - obs|^2/(2 sigma_eps^2), f = alpha |.| on K x = x2 - x1.
TargetSpec tv2pixel_target(const Vec& observation, double sigma_eps, double alpha);

// g = Gaussian likelihood, f = alpha |.|_{2,1} on grad2d.
TargetSpec tv_image_target(const ImageGrid& noisy, double sigma_eps, double alpha);

// Primal (u, v), K = tgv_block, f = alpha1 |.|_{2,1} (groups of 2) on
// grad u - v plus alpha0 |.|_{2,1} (groups of 3) on E v.
TargetSpec tgv_image_target(const ImageGrid& noisy, double sigma_eps, double alpha1, double alpha0);

// Minimal-norm subgradient of alpha |.|_{2,1} over groups (0 at a zero group).
VecMap group_l21_subgrad(double alpha, Index group_size);

}  // namespace pdl
