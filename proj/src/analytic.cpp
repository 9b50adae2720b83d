#include "pdl/analytic.hpp"

#include <Eigen/LU>
#include <cmath>

#include "pdl/errors.hpp"

namespace pdl {

void GaussModel1D::validate() const {
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!pos(c_f) || !pos(c_g) || !pos(lambda)) throw DomainError("GaussModel1D: c_f, c_g and lambda must be positive");
  if (!(k != 0.0) || !std::isfinite(k)) throw DomainError("GaussModel1D: k must be nonzero and finite");
}

double target_variance(const GaussModel1D& m) {
  m.validate();
  return m.c_f * m.c_g / (m.c_f + m.k * m.k * m.c_g);
}

Eigen::Matrix2d stationary_cov_pd(const GaussModel1D& m) {
  m.validate();
  const double cf = m.c_f, cg = m.c_g, k = m.k, l = m.lambda;
  const double s = cf + k * k * cg;
  const double pre = 1.0 / (s * (1.0 + l * cf * cg));
  Eigen::Matrix2d S;
  S(0, 0) = cg * s + l * cf * cf * cg * cg;
  S(0, 1) = S(1, 0) = k * l * cf * cg * cg;
  S(1, 1) = k * k * l * cg * cg;
  return pre * S;
}

Eigen::Matrix2d stationary_cov_pd_limit(const GaussModel1D& m) {
  m.validate();
  const double cf = m.c_f, cg = m.c_g, k = m.k;
  Eigen::Matrix2d S;
  S << cf * cg, k * cg, k * cg, k * k * cg / cf;
  return S / (cf + k * k * cg);
}

Eigen::Matrix2d drift_pd(const GaussModel1D& m) {
  m.validate();
  Eigen::Matrix2d A;
  A << 1.0 / m.c_g, m.k, -m.lambda * m.k, m.lambda * m.c_f;
  return A;
}

Eigen::Vector2d diffusion_pd() { return {std::sqrt(2.0), 0.0}; }

Eigen::Matrix2d lyapunov_cov(const Eigen::Matrix2d& A, const Mat& B) {
  if (B.rows() != 2 || B.cols() < 1 || B.cols() > 2) throw DimensionError("lyapunov_cov: B must be 2x1 or 2x2");
  if (!A.allFinite() || !B.allFinite()) throw DomainError("lyapunov_cov: non-finite input");
  // Eigenvalues of a real 2x2 have positive real part iff trace > 0 and det > 0.
  if (!(A.trace() > 0.0 && A.determinant() > 0.0))
    throw DomainError("lyapunov_cov: A must have eigenvalues with positive real part");
  const Eigen::Matrix2d Q = B * B.transpose();
  const double a11 = A(0, 0), a12 = A(0, 1), a21 = A(1, 0), a22 = A(1, 1);
  Eigen::Matrix3d M;
  M << 2 * a11, 2 * a12, 0,
       a21, a11 + a22, a12,
       0, 2 * a21, 2 * a22;
  const Eigen::Vector3d rhs(Q(0, 0), Q(0, 1), Q(1, 1));
  Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
  if (!lu.isInvertible()) throw DomainError("lyapunov_cov: singular system");
  const Eigen::Vector3d s = lu.solve(rhs);
  Eigen::Matrix2d S;
  S << s[0], s[1], s[1], s[2];
  return S;
}

double general_noise_primal_variance(const GaussModel1D& m, double b11, double b12, double b21, double b22) {
  m.validate();
  const double cf = m.c_f, cg = m.c_g, k = m.k, l = m.lambda;
  const double num = (b11 * b11 + b12 * b12) * (l * cf * cf * cg * cg + cg * (cf + k * k * cg)) -
                     2.0 * (b11 * b21 + b12 * b22) * k * cf * cg * cg +
                     (b21 * b21 + b22 * b22) * k * k * cg * cg / l;
  return num / (2.0 * (1.0 + l * cf * cg) * (cf + k * k * cg));
}

double bias_bound_c1(double lambda, double omega_g, double omega_fstar, double D1, double D2, double D3) {
  if (!(omega_g > 0.0)) throw DomainError("bias_bound_c1: omega_g must be positive");
  if (!(omega_fstar > 0.0) || !(lambda * omega_fstar > omega_g))
    throw DomainError("bias_bound_c1: requires lambda > omega_g / omega_fstar");
  if (D1 < 0.0 || D2 < 0.0 || D3 < 0.0) throw DomainError("bias_bound_c1: constants must be >= 0");
  return std::sqrt(D1 / (lambda * omega_g) + (D2 + D3) / (4.0 * omega_g * (lambda * omega_fstar - omega_g)));
}

double potential_curvature(const GaussModel1D& m) {
  m.validate();
  return 1.0 / m.c_g + m.k * m.k / m.c_f;
}

Eigen::Vector2d modified_direction(const GaussModel1D& m) {
  m.validate();
  return {1.0, m.k / m.c_f};
}

Eigen::Matrix2d modified_stationary_cov(const GaussModel1D& m) {
  const Eigen::Vector2d b = modified_direction(m);
  return b * b.transpose() / potential_curvature(m);
}

double gaussian_w2_1d(double mean1, double var1, double mean2, double var2) {
  if (!(var1 >= 0.0) || !(var2 >= 0.0)) throw DomainError("gaussian_w2_1d: variances must be >= 0");
  const double dm = mean1 - mean2, ds = std::sqrt(var1) - std::sqrt(var2);
  return std::sqrt(dm * dm + ds * ds);
}

TargetSpec gauss1d_target(const GaussModel1D& m) {
  m.validate();
  const double cf = m.c_f, cg = m.c_g;
  TargetSpec t;
  t.label = "gauss1d";
  t.K = scalar_map(m.k);
  t.g_prox = scaled_square_prox(cg);
  // f(y) = y^2/(2cf)  =>  f*(y) = cf y^2 / 2, modulus cf.
  t.fstar_prox = ProxOperator("conj_square", cf, [cf](ConstVecRef v, double gamma, VecRef out) {
    out = v / (1.0 + gamma * cf);
  });
  t.g_grad = [cg](ConstVecRef x, VecRef out) { out = x / cg; };
  t.f_grad = [cf](ConstVecRef z, VecRef out) { out = z / cf; };
  t.f_subgrad = t.f_grad;
  t.f_hess = [cf](ConstVecRef, ConstVecRef v, VecRef out) { out = v / cf; };
  t.fstar_grad = [cf](ConstVecRef y, VecRef out) { out = cf * y; };
  return t;
}

}  // namespace pdl
