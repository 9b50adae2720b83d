#include "pdl/linop.hpp"

#include <cmath>
#include <mutex>
#include <optional>
#include <random>

#include "pdl/errors.hpp"

namespace pdl {

struct LinearMap::NormCache {
  std::once_flag once;
  std::optional<double> fixed;
  double value = 0.0;
};

LinearMap::LinearMap(Index in_dim, Index out_dim, Kernel forward, Kernel adjoint, std::string label)
    : d_(in_dim),
      m_(out_dim),
      fwd_(std::move(forward)),
      adj_(std::move(adjoint)),
      label_(std::move(label)),
      norm_(std::make_shared<NormCache>()) {
  if (d_ < 1 || m_ < 1) throw DimensionError("LinearMap dimensions must be >= 1");
}

Vec LinearMap::operator()(ConstVecRef x) const {
  if (x.size() != d_) throw DimensionError(label_ + ": input has size " + std::to_string(x.size()) + ", expected " + std::to_string(d_));
  Vec out(m_);
  fwd_(x, out);
  return out;
}

Vec LinearMap::adjoint(ConstVecRef y) const {
  if (y.size() != m_) throw DimensionError(label_ + ": adjoint input has size " + std::to_string(y.size()) + ", expected " + std::to_string(m_));
  Vec out(d_);
  adj_(y, out);
  return out;
}

double LinearMap::norm() const {
  if (!norm_) throw Error("empty LinearMap");
  std::call_once(norm_->once, [this] {
    norm_->value = norm_->fixed ? *norm_->fixed : power_iteration_norm(*this, kDefaultPowerIters, kDefaultPowerSeed);
  });
  return norm_->value;
}

void LinearMap::set_norm(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw DomainError("operator norm must be finite and >= 0");
  norm_ = std::make_shared<NormCache>();
  norm_->fixed = value;
}

double power_iteration_norm(const LinearMap& K, int iters, std::uint64_t seed) {
  if (iters < 1) throw DomainError("power_iteration_norm: iters must be >= 1");
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  Vec x(K.in_dim());
  for (Index i = 0; i < x.size(); ++i) x[i] = nd(eng);
  Vec kx(K.out_dim());
  Vec ktkx(K.in_dim());
  double best = 0.0;
  for (int it = 0; it < iters; ++it) {
    const double nx = x.norm();
    if (nx == 0.0) return best;
    x /= nx;
    K.apply(x, kx);
    best = std::max(best, kx.norm());
    K.apply_adjoint(kx, ktkx);
    x.swap(ktkx);
  }
  return best;
}

LinearMap scalar_map(double k) {
  if (!std::isfinite(k)) throw DomainError("scalar_map: k must be finite");
  auto f = [k](ConstVecRef x, VecRef out) { out = k * x; };
  LinearMap K(1, 1, f, f, "scalar");
  K.set_norm(std::abs(k));
  return K;
}

LinearMap dense_map(const Mat& A) {
  if (A.rows() < 1 || A.cols() < 1) throw DimensionError("dense_map: empty matrix");
  auto fwd = [A](ConstVecRef x, VecRef out) { out.noalias() = A * x; };
  auto adj = [A](ConstVecRef y, VecRef out) { out.noalias() = A.transpose() * y; };
  return LinearMap(A.cols(), A.rows(), fwd, adj, "dense");
}

LinearMap identity_map(Index n) {
  auto f = [](ConstVecRef x, VecRef out) { out = x; };
  LinearMap K(n, n, f, f, "identity");
  K.set_norm(1.0);
  return K;
}

LinearMap diff_pair() {
  LinearMap K(
      2, 1, [](ConstVecRef x, VecRef out) { out[0] = x[1] - x[0]; },
      [](ConstVecRef y, VecRef out) {
        out[0] = -y[0];
        out[1] = y[0];
      },
      "diff_pair");
  K.set_norm(std::sqrt(2.0));
  return K;
}

LinearMap grad2d(Index width, Index height) {
  if (width < 1 || height < 1) throw DimensionError("grad2d: dims must be >= 1");
  const Index w = width, h = height, n = w * h;
  auto fwd = [w, h](ConstVecRef u, VecRef out) {
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        const Index p = r * w + c;
        out[2 * p] = c + 1 < w ? u[p + 1] - u[p] : 0.0;
        out[2 * p + 1] = r + 1 < h ? u[p + w] - u[p] : 0.0;
      }
    }
  };
  auto adj = [w, h](ConstVecRef y, VecRef out) {
    out.setZero();
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        const Index p = r * w + c;
        if (c + 1 < w) {
          out[p] -= y[2 * p];
          out[p + 1] += y[2 * p];
        }
        if (r + 1 < h) {
          out[p] -= y[2 * p + 1];
          out[p + w] += y[2 * p + 1];
        }
      }
    }
  };
  return LinearMap(n, 2 * n, fwd, adj, "grad2d");
}

LinearMap sym_grad2d(Index width, Index height) {
  if (width < 1 || height < 1) throw DimensionError("sym_grad2d: dims must be >= 1");
  const Index w = width, h = height, n = w * h;
  const double s = std::sqrt(2.0) / 2.0;
  // Backward differences; zero in the first column (h) / first row (v).
  auto fwd = [w, h, s](ConstVecRef v, VecRef out) {
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        const Index p = r * w + c;
        const double dh_vh = c > 0 ? v[2 * p] - v[2 * (p - 1)] : 0.0;
        const double dv_vv = r > 0 ? v[2 * p + 1] - v[2 * (p - w) + 1] : 0.0;
        const double dv_vh = r > 0 ? v[2 * p] - v[2 * (p - w)] : 0.0;
        const double dh_vv = c > 0 ? v[2 * p + 1] - v[2 * (p - 1) + 1] : 0.0;
        out[3 * p] = dh_vh;
        out[3 * p + 1] = dv_vv;
        out[3 * p + 2] = s * (dv_vh + dh_vv);
      }
    }
  };
  auto adj = [w, h, s](ConstVecRef q, VecRef out) {
    out.setZero();
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        const Index p = r * w + c;
        const double a = q[3 * p], b = q[3 * p + 1], o = s * q[3 * p + 2];
        if (c > 0) {
          out[2 * p] += a;
          out[2 * (p - 1)] -= a;
          out[2 * p + 1] += o;
          out[2 * (p - 1) + 1] -= o;
        }
        if (r > 0) {
          out[2 * p + 1] += b;
          out[2 * (p - w) + 1] -= b;
          out[2 * p] += o;
          out[2 * (p - w)] -= o;
        }
      }
    }
  };
  return LinearMap(2 * n, 3 * n, fwd, adj, "sym_grad2d");
}

LinearMap tgv_block(Index width, Index height, const LinearMap& sym_grad) {
  const Index n = width * height;
  if (!sym_grad.valid() || sym_grad.in_dim() != 2 * n || sym_grad.out_dim() != 3 * n)
    throw DimensionError("tgv_block: symmetrized gradient does not match image dims");
  LinearMap grad = grad2d(width, height);
  LinearMap E = sym_grad;
  auto fwd = [grad, E, n](ConstVecRef x, VecRef out) {
    auto p = out.head(2 * n);
    grad.apply(x.head(n), p);
    p -= x.segment(n, 2 * n);
    E.apply(x.segment(n, 2 * n), out.segment(2 * n, 3 * n));
  };
  auto adj = [grad, E, n](ConstVecRef y, VecRef out) {
    grad.apply_adjoint(y.head(2 * n), out.head(n));
    auto v = out.segment(n, 2 * n);
    E.apply_adjoint(y.segment(2 * n, 3 * n), v);
    v -= y.head(2 * n);
  };
  return LinearMap(3 * n, 5 * n, fwd, adj, "tgv_block");
}

}  // namespace pdl
