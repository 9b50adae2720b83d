#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "pdl/types.hpp"

namespace pdl {

// Matrix-free linear map K: R^d -> R^m with adjoint.
//
// Copies share the lazily computed norm estimate. Kernels must not alias
// input and output.
class LinearMap {
 public:
  using Kernel = std::function<void(ConstVecRef in, VecRef out)>;

  LinearMap() = default;
  LinearMap(Index in_dim, Index out_dim, Kernel forward, Kernel adjoint, std::string label);

  Index in_dim() const { return d_; }
  Index out_dim() const { return m_; }
  const std::string& label() const { return label_; }
  bool valid() const { return static_cast<bool>(fwd_); }

  void apply(ConstVecRef x, VecRef out) const { fwd_(x, out); }
  void apply_adjoint(ConstVecRef y, VecRef out) const { adj_(y, out); }
  Vec operator()(ConstVecRef x) const;
  Vec adjoint(ConstVecRef y) const;

  // Operator norm; exact when known at construction, otherwise power
  // iteration (computed once, then cached).
  double norm() const;
  void set_norm(double value);

 private:
  struct NormCache;
  Index d_ = 0;
  Index m_ = 0;
  Kernel fwd_;
  Kernel adj_;
  std::string label_;
  std::shared_ptr<NormCache> norm_;
};

inline constexpr int kDefaultPowerIters = 300;
inline constexpr std::uint64_t kDefaultPowerSeed = 0x5eed;

LinearMap scalar_map(double k);
LinearMap dense_map(const Mat& A);
LinearMap identity_map(Index n);
// R^2 -> R, x -> x2 - x1.
LinearMap diff_pair();
// Forward differences, Neumann boundary. Row-major image, output
// interleaved (h, v) per pixel.
LinearMap grad2d(Index width, Index height);
// Symmetrized backward-difference Jacobian on interleaved (h, v) fields.
// Output has 3 channels per pixel: (d_h v_h, d_v v_v, sqrt2 * (d_v v_h + d_h v_v)/2).
LinearMap sym_grad2d(Index width, Index height);
// (u, v) -> (grad u - v, E v).
LinearMap tgv_block(Index width, Index height, const LinearMap& sym_grad);

// Power iteration on K^T K. Returns the running maximum of the Rayleigh
// estimates, which is nondecreasing in iters.
double power_iteration_norm(const LinearMap& K, int iters, std::uint64_t seed);

}  // namespace pdl
