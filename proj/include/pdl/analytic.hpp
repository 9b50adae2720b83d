#pragma once

#include <Eigen/Core>

#include "pdl/samplers.hpp"

namespace pdl {

// f(y) = y^2/(2 c_f), g(x) = x^2/(2 c_g), K = k.
struct GaussModel1D {
  double c_f = 1.0;
  double c_g = 1.0;
  double k = 1.0;
  double lambda = 1.0;

  void validate() const;
};

double target_variance(const GaussModel1D& m);

// Stationary covariance of the continuous primal-dual dynamics.
Eigen::Matrix2d stationary_cov_pd(const GaussModel1D& m);
// lambda -> infinity limit.
Eigen::Matrix2d stationary_cov_pd_limit(const GaussModel1D& m);

// Drift and diffusion of dZ = -A Z dt + B dW for the primal-dual dynamics.
Eigen::Matrix2d drift_pd(const GaussModel1D& m);
Eigen::Vector2d diffusion_pd();

// Solves A S + S A^T = B B^T. B is 2x1 or 2x2.
Eigen::Matrix2d lyapunov_cov(const Eigen::Matrix2d& A, const Mat& B);

double general_noise_primal_variance(const GaussModel1D& m, double b11, double b12, double b21, double b22);

double bias_bound_c1(double lambda, double omega_g, double omega_fstar, double D1, double D2, double D3);

// Modified dynamics: invariant covariance v_h^{-1} b b^T with b = (1, k/c_f).
double potential_curvature(const GaussModel1D& m);  // v_h
Eigen::Vector2d modified_direction(const GaussModel1D& m);
Eigen::Matrix2d modified_stationary_cov(const GaussModel1D& m);

// W2 between 1D Gaussians N(m1, v1), N(m2, v2).
double gaussian_w2_1d(double mean1, double var1, double mean2, double var2);

// Sampling problem for the model: prox data, gradients, Hessian.
TargetSpec gauss1d_target(const GaussModel1D& m);

}  // namespace pdl
