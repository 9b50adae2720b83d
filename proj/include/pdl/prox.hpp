#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pdl/types.hpp"

namespace pdl {

// Resolvent (id + gamma*dphi)^{-1} of a convex function phi.
//
// The kernel writes into `out`, which may alias the input. `apply` is the
// unchecked hot-path entry; `operator()` validates and allocates.
class ProxOperator {
 public:
  using Kernel = std::function<void(ConstVecRef v, double gamma, VecRef out)>;

  ProxOperator() = default;
  // dim < 0 means "any dimension".
  ProxOperator(std::string label, double modulus, Kernel kernel, Index dim = -1);

  void apply(ConstVecRef v, double gamma, VecRef out) const { kernel_(v, gamma, out); }
  Vec operator()(ConstVecRef v, double gamma) const;

  double modulus() const { return modulus_; }
  const std::string& label() const { return label_; }
  Index dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(kernel_); }

 private:
  std::string label_;
  double modulus_ = 0.0;
  Kernel kernel_;
  Index dim_ = -1;
};

// Free-function forms. All reject non-finite input.
Vec prox_scaled_square(ConstVecRef v, double gamma, double c);
Vec prox_quadratic_data(ConstVecRef v, double gamma, ConstVecRef target, double var);
Vec project_interval(ConstVecRef v, double alpha);
Vec project_l2_ball_groups(ConstVecRef v, double alpha, Index group_size);
Vec prox_via_moreau(const ProxOperator& fstar_prox, ConstVecRef v, double gamma);

// prox of w -> |w|^2/(2c); modulus 1/c.
ProxOperator scaled_square_prox(double c);
// prox of w -> |w - target|^2/(2 var); modulus 1/var.
ProxOperator quadratic_data_prox(Vec target, double var);
// Indicator of [-alpha, alpha]^n. gamma is ignored.
ProxOperator interval_projection(double alpha);
// Indicator of the groupwise l2 ball of radius alpha. gamma is ignored.
ProxOperator group_ball_projection(double alpha, Index group_size);
// phi = 0: identity.
ProxOperator identity_prox();
// Separable sum over consecutive blocks of the given sizes.
ProxOperator block_prox(std::vector<std::pair<ProxOperator, Index>> blocks);

}  // namespace pdl
