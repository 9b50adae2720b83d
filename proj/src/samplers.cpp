#include "pdl/samplers.hpp"

#include <cmath>
#include <utility>

#include "pdl/errors.hpp"

namespace pdl {

void TargetSpec::check() const {
  if (!K.valid()) throw Error("TargetSpec: missing K");
  if (!g_prox.valid() || !fstar_prox.valid()) throw Error("TargetSpec: missing prox");
  if (g_prox.dim() >= 0 && g_prox.dim() != d())
    throw DimensionError("TargetSpec: g prox dimension " + std::to_string(g_prox.dim()) + " != d = " + std::to_string(d()));
  if (fstar_prox.dim() >= 0 && fstar_prox.dim() != m())
    throw DimensionError("TargetSpec: f* prox dimension " + std::to_string(fstar_prox.dim()) + " != m = " + std::to_string(m()));
}

std::string to_string(Method m) {
  switch (m) {
    case Method::ulpda_outer: return "ulpda_outer";
    case Method::ulpda_inner: return "ulpda_inner";
    case Method::ulpda_general: return "ulpda_general";
    case Method::ula: return "ula";
    case Method::prox_sub: return "prox_sub";
    case Method::modified_sde: return "modified_sde";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::ulpda_outer, Method::ulpda_inner, Method::ulpda_general, Method::ula, Method::prox_sub,
                   Method::modified_sde})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown sampler '" + s + "'");
}

bool is_ulpda(Method m) {
  return m == Method::ulpda_outer || m == Method::ulpda_inner || m == Method::ulpda_general;
}

ValidationReport validate_params(const TargetSpec& target, const SamplerParams& p) {
  target.check();
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) throw DomainError("tau must be positive and finite");
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) throw DomainError("lambda must be positive and finite");
  const double sigma = p.sigma();
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive and finite");
  if (!(p.theta >= 0.0 && p.theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");

  ValidationReport r;
  r.L = target.K.norm();
  r.tau = p.tau;
  r.sigma = sigma;
  r.theta = p.theta;
  r.omega_g = target.g_prox.modulus();
  r.omega_fstar = target.fstar_prox.modulus();
  const double tsl2 = p.tau * sigma * r.L * r.L;
  r.theta_tau_sigma_L2 = p.theta * tsl2;

  if (is_ulpda(p.method) && r.theta_tau_sigma_L2 > 1.0)
    throw RegimeError("theta*tau*sigma*L^2 = " + std::to_string(r.theta_tau_sigma_L2) + " exceeds 1 (L = " +
                      std::to_string(r.L) + ")");

  r.stability_regime = p.theta == 1.0 && tsl2 <= 1.0;
  const double c2 = std::max(1.0 / (1.0 + 2.0 * r.omega_g * p.tau), 1.0 / (1.0 + 2.0 * r.omega_fstar * sigma));
  const double c1 = std::max(1.0 / (1.0 + r.omega_g * p.tau), 1.0 / (1.0 + r.omega_fstar * sigma));
  r.contraction_regime = p.theta < 1.0 && p.theta >= c2 && r.theta_tau_sigma_L2 <= 1.0;
  r.bias_regime = p.theta < 1.0 && p.theta >= c1 && r.theta_tau_sigma_L2 <= 1.0;

  if (p.method == Method::ulpda_general) {
    const Index nd = target.d() + target.m();
    if (p.b_x.rows() != target.d() || p.b_x.cols() != nd || p.b_y.rows() != target.m() || p.b_y.cols() != nd)
      throw DimensionError("generalized noise needs B_X of shape d x (d+m) and B_Y of shape m x (d+m)");
  }
  if (p.method == Method::ula && !(target.g_grad && target.f_grad))
    throw DomainError("ula requires g_grad and f_grad");
  if (p.method == Method::prox_sub && !target.f_subgrad) throw DomainError("prox_sub requires f_subgrad");
  if (p.method == Method::modified_sde && !(target.g_grad && target.f_grad && target.f_hess && target.fstar_grad))
    throw DomainError("modified_sde requires g_grad, f_grad, f_hess and fstar_grad");
  return r;
}

ChainState ChainState::start(Vec x0, Vec y0) {
  ChainState s;
  s.x_prev = x0;
  s.x = std::move(x0);
  s.y = std::move(y0);
  s.n = 0;
  return s;
}

Sampler::Sampler(TargetSpec target, SamplerParams params)
    : target_(std::move(target)), params_(std::move(params)), report_(validate_params(target_, params_)) {
  sqrt_2tau_ = std::sqrt(2.0 * params_.tau);
  sqrt_tau_ = std::sqrt(params_.tau);
}

Index Sampler::noise_dim() const {
  return params_.method == Method::ulpda_general ? target_.d() + target_.m() : target_.d();
}

Sampler::Workspace Sampler::workspace() const {
  const Index d = target_.d(), m = target_.m();
  Workspace w;
  w.xi = Vec::Zero(noise_dim());
  for (Vec* v : {&w.xt, &w.kty, &w.xd, &w.xn, &w.gg, &w.r}) *v = Vec::Zero(d);
  for (Vec* v : {&w.kx, &w.ym, &w.yn, &w.kr, &w.mr, &w.kxi, &w.mxi, &w.gf, &w.gs}) *v = Vec::Zero(m);
  return w;
}

void Sampler::step(ChainState& s, ChainRng& rng, Workspace& ws) const {
  rng.fill_normal(ws.xi);
  step(s, ws.xi, ws);
}

void Sampler::step(ChainState& s, ConstVecRef xi, Workspace& ws) const {
  switch (params_.method) {
    case Method::ulpda_outer:
    case Method::ulpda_inner:
    case Method::ulpda_general: ulpda(s, xi, ws); break;
    case Method::ula: ula(s, xi, ws); break;
    case Method::prox_sub: prox_sub(s, xi, ws); break;
    case Method::modified_sde: modified_sde(s, xi, ws); break;
  }
  ++s.n;
}

void Sampler::ulpda(ChainState& s, ConstVecRef xi, Workspace& ws) const {
  const double tau = params_.tau, sigma = params_.sigma(), theta = params_.theta;
  const Index d = target_.d();

  ws.xt = s.x + theta * (s.x - s.x_prev);
  target_.K.apply(ws.xt, ws.kx);
  ws.ym = s.y + sigma * ws.kx;
  target_.fstar_prox.apply(ws.ym, sigma, ws.yn);
  if (params_.method == Method::ulpda_general) ws.yn.noalias() += sqrt_tau_ * (params_.b_y * xi);

  target_.K.apply_adjoint(ws.yn, ws.kty);
  ws.xd = s.x - tau * ws.kty;
  switch (params_.method) {
    case Method::ulpda_inner:
      ws.xd += sqrt_2tau_ * xi.head(d);
      target_.g_prox.apply(ws.xd, tau, ws.xn);
      break;
    case Method::ulpda_general:
      target_.g_prox.apply(ws.xd, tau, ws.xn);
      ws.xn.noalias() += sqrt_tau_ * (params_.b_x * xi);
      break;
    default:
      target_.g_prox.apply(ws.xd, tau, ws.xn);
      ws.xn += sqrt_2tau_ * xi.head(d);
      break;
  }
  s.x_prev.swap(s.x);
  s.x.swap(ws.xn);
  s.y.swap(ws.yn);
}

void Sampler::ula(ChainState& s, ConstVecRef xi, Workspace& ws) const {
  const double tau = params_.tau;
  target_.K.apply(s.x, ws.kx);
  (*target_.f_grad)(ws.kx, ws.gf);
  target_.K.apply_adjoint(ws.gf, ws.kty);
  (*target_.g_grad)(s.x, ws.gg);
  ws.xn = s.x - tau * (ws.gg + ws.kty) + sqrt_2tau_ * xi;
  s.x_prev.swap(s.x);
  s.x.swap(ws.xn);
}

void Sampler::prox_sub(ChainState& s, ConstVecRef xi, Workspace& ws) const {
  const double tau = params_.tau;
  target_.K.apply(s.x, ws.kx);
  (*target_.f_subgrad)(ws.kx, ws.yn);
  target_.K.apply_adjoint(ws.yn, ws.kty);
  ws.xd = s.x - tau * ws.kty;
  target_.g_prox.apply(ws.xd, tau, ws.xn);
  ws.xn += sqrt_2tau_ * xi;
  s.x_prev.swap(s.x);
  s.x.swap(ws.xn);
  s.y.swap(ws.yn);
}

void Sampler::modified_sde(ChainState& s, ConstVecRef xi, Workspace& ws) const {
  const double tau = params_.tau, lambda = params_.lambda;
  const auto& K = target_.K;
  K.apply(s.x, ws.kx);
  (*target_.f_grad)(ws.kx, ws.gf);
  K.apply_adjoint(ws.gf, ws.kty);
  (*target_.g_grad)(s.x, ws.gg);
  ws.r = ws.gg + ws.kty;  // grad of the full potential
  // M^T v = H_f(Kx) K v
  K.apply(ws.r, ws.kr);
  (*target_.f_hess)(ws.kx, ws.kr, ws.mr);
  K.apply(xi, ws.kxi);
  (*target_.f_hess)(ws.kx, ws.kxi, ws.mxi);
  (*target_.fstar_grad)(s.y, ws.gs);

  K.apply_adjoint(s.y, ws.kty);
  ws.xn = s.x - tau * (ws.gg + ws.kty) + sqrt_2tau_ * xi;
  ws.yn = s.y - tau * (lambda * (ws.gs - ws.kx) + ws.mr) + sqrt_2tau_ * ws.mxi;
  s.x_prev.swap(s.x);
  s.x.swap(ws.xn);
  s.y.swap(ws.yn);
}

namespace {

ChainState single_step(const ChainState& s, const TargetSpec& target, SamplerParams params, ChainRng& rng) {
  Sampler smp(target, std::move(params));
  if (s.x.size() != target.d() || s.x_prev.size() != target.d() || s.y.size() != target.m())
    throw DimensionError("chain state dimensions do not match target (d=" + std::to_string(target.d()) +
                         ", m=" + std::to_string(target.m()) + ")");
  auto ws = smp.workspace();
  ChainState out = s;
  smp.step(out, rng, ws);
  return out;
}

}  // namespace

ChainState ulpda_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params, ChainRng& rng) {
  if (!is_ulpda(params.method)) throw DomainError("ulpda_step: params.method is not a ULPDA variant");
  return single_step(s, target, params, rng);
}

ChainState ula_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params, ChainRng& rng) {
  SamplerParams p = params;
  p.method = Method::ula;
  return single_step(s, target, p, rng);
}

ChainState prox_sub_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params, ChainRng& rng) {
  SamplerParams p = params;
  p.method = Method::prox_sub;
  return single_step(s, target, p, rng);
}

ChainState modified_sde_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params,
                             ChainRng& rng) {
  SamplerParams p = params;
  p.method = Method::modified_sde;
  return single_step(s, target, p, rng);
}

}  // namespace pdl
