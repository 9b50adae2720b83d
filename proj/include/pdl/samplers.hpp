#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "pdl/linop.hpp"
#include "pdl/prox.hpp"
#include "pdl/rng.hpp"
#include "pdl/types.hpp"

namespace pdl {

using VecMap = std::function<void(ConstVecRef in, VecRef out)>;
// (z, v) -> H(z) v
using HessApply = std::function<void(ConstVecRef at, ConstVecRef v, VecRef out)>;

// Sampling problem exp(-f(Kx) - g(x)) in primal-dual form.
struct TargetSpec {
  ProxOperator g_prox;
  ProxOperator fstar_prox;
  LinearMap K;
  std::optional<VecMap> g_grad;      // x -> grad g(x)
  std::optional<VecMap> f_subgrad;   // z -> minimal-norm element of df(z)
  std::optional<VecMap> f_grad;      // z -> grad f(z), smooth f only
  std::optional<HessApply> f_hess;   // (z, v) -> H_f(z) v
  std::optional<VecMap> fstar_grad;  // y -> grad f*(y)
  std::string label;

  Index d() const { return K.in_dim(); }
  Index m() const { return K.out_dim(); }
  void check() const;
};

enum class Method { ulpda_outer, ulpda_inner, ulpda_general, ula, prox_sub, modified_sde };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
bool is_ulpda(Method m);

struct SamplerParams {
  double tau = 1e-3;
  double lambda = 1.0;
  double theta = 1.0;
  Method method = Method::ulpda_outer;
  // Generalized variant only: B_X is d x (d+m), B_Y is m x (d+m).
  Mat b_x;
  Mat b_y;
  std::uint64_t seed = 0;

  double sigma() const { return lambda * tau; }
};

struct ValidationReport {
  double L = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  double theta = 0.0;
  double omega_g = 0.0;
  double omega_fstar = 0.0;
  double theta_tau_sigma_L2 = 0.0;
  bool stability_regime = false;
  bool contraction_regime = false;
  bool bias_regime = false;
};

// Throws DomainError for nonpositive/non-finite steps or theta outside
// [0, 1], RegimeError when a ULPDA method has theta*tau*sigma*L^2 > 1.
ValidationReport validate_params(const TargetSpec& target, const SamplerParams& params);

struct ChainState {
  Vec x;
  Vec y;
  Vec x_prev;
  std::uint64_t n = 0;

  static ChainState start(Vec x0, Vec y0);
};

// A validated (target, params) pair. Steps are allocation-free given a
// Workspace; one Workspace per thread.
class Sampler {
 public:
  struct Workspace {
    Vec xi, xt, kx, ym, yn, kty, xd, xn;
    Vec gg, r, kr, mr, kxi, mxi, gf, gs;
  };

  Sampler(TargetSpec target, SamplerParams params);

  Workspace workspace() const;
  Index noise_dim() const;
  const TargetSpec& target() const { return target_; }
  const SamplerParams& params() const { return params_; }
  const ValidationReport& report() const { return report_; }

  // Advance with explicit standard-normal input of size noise_dim().
  void step(ChainState& s, ConstVecRef xi, Workspace& ws) const;
  void step(ChainState& s, ChainRng& rng, Workspace& ws) const;

 private:
  void ulpda(ChainState& s, ConstVecRef xi, Workspace& ws) const;
  void ula(ChainState& s, ConstVecRef xi, Workspace& ws) const;
  void prox_sub(ChainState& s, ConstVecRef xi, Workspace& ws) const;
  void modified_sde(ChainState& s, ConstVecRef xi, Workspace& ws) const;

  TargetSpec target_;
  SamplerParams params_;
  ValidationReport report_;
  double sqrt_2tau_ = 0.0;
  double sqrt_tau_ = 0.0;
};

// Single-step conveniences; each validates and checks dimensions.
ChainState ulpda_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params, ChainRng& rng);
ChainState ula_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params, ChainRng& rng);
ChainState prox_sub_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params, ChainRng& rng);
ChainState modified_sde_step(const ChainState& s, const TargetSpec& target, const SamplerParams& params, ChainRng& rng);

}  // namespace pdl
