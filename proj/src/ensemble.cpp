#include "pdl/ensemble.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "pdl/errors.hpp"

namespace pdl {

InitSpec InitSpec::point(Vec x0, Vec y0) {
  InitSpec s;
  s.kind = Kind::point;
  s.x0 = std::move(x0);
  s.y0 = std::move(y0);
  return s;
}

InitSpec InitSpec::gaussian(double x_std, double y_std, Vec x0, Vec y0) {
  InitSpec s = point(std::move(x0), std::move(y0));
  s.kind = Kind::gaussian;
  s.x_std = x_std;
  s.y_std = y_std;
  return s;
}

InitSpec InitSpec::given(std::vector<ChainState> states) {
  InitSpec s;
  s.kind = Kind::states;
  s.states = std::move(states);
  return s;
}

SampleStore::SampleStore(Index d, Index m, std::size_t n_chains, std::vector<std::uint64_t> record_steps,
                         bool has_dual)
    : d_(d), m_(m), n_chains_(n_chains), steps_(std::move(record_steps)), has_dual_(has_dual) {
  xs_.assign(steps_.size() * n_chains_ * static_cast<std::size_t>(d_), 0.0);
  if (has_dual_) ys_.assign(steps_.size() * n_chains_ * static_cast<std::size_t>(m_), 0.0);
}

Eigen::Map<const Vec> SampleStore::x(std::size_t r, std::size_t c) const {
  return Eigen::Map<const Vec>(xs_.data() + (r * n_chains_ + c) * d_, d_);
}

Eigen::Map<const Vec> SampleStore::y(std::size_t r, std::size_t c) const {
  if (!has_dual_) throw Error("SampleStore: dual samples were not recorded");
  return Eigen::Map<const Vec>(ys_.data() + (r * n_chains_ + c) * m_, m_);
}

Eigen::Map<Vec> SampleStore::x_mut(std::size_t r, std::size_t c) {
  return Eigen::Map<Vec>(xs_.data() + (r * n_chains_ + c) * d_, d_);
}

Eigen::Map<Vec> SampleStore::y_mut(std::size_t r, std::size_t c) {
  return Eigen::Map<Vec>(ys_.data() + (r * n_chains_ + c) * m_, m_);
}

Mat SampleStore::primal_matrix() const {
  return Eigen::Map<const Mat>(xs_.data(), d_, static_cast<Index>(n_samples()));
}

Mat SampleStore::dual_matrix() const {
  if (!has_dual_) throw Error("SampleStore: dual samples were not recorded");
  return Eigen::Map<const Mat>(ys_.data(), m_, static_cast<Index>(n_samples()));
}

Mat SampleStore::primal_at(std::size_t record) const {
  if (record >= n_records()) throw DimensionError("SampleStore: record index out of range");
  return Eigen::Map<const Mat>(xs_.data() + record * n_chains_ * d_, d_, static_cast<Index>(n_chains_));
}

bool SampleStore::operator==(const SampleStore& o) const {
  if (d_ != o.d_ || m_ != o.m_ || n_chains_ != o.n_chains_ || steps_ != o.steps_ || xs_ != o.xs_ || ys_ != o.ys_)
    return false;
  if (final_states.size() != o.final_states.size()) return false;
  for (std::size_t i = 0; i < final_states.size(); ++i) {
    const auto &a = final_states[i], &b = o.final_states[i];
    if (a.n != b.n || a.x != b.x || a.y != b.y || a.x_prev != b.x_prev) return false;
  }
  return true;
}

std::vector<std::uint64_t> record_schedule(std::uint64_t n_steps, std::uint64_t burn_in, std::uint64_t thinning) {
  if (thinning == 0) throw DomainError("thinning must be >= 1");
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = burn_in; n <= n_steps; n += thinning) out.push_back(n);
  return out;
}

void parallel_blocks(std::size_t n, unsigned workers, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = n * w / workers, e = n * (w + 1) / workers;
    pool.emplace_back([&, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace {

Vec or_zeros(const Vec& v, Index n, const char* what) {
  if (v.size() == 0) return Vec::Zero(n);
  if (v.size() != n) throw DimensionError(std::string("init ") + what + " has wrong dimension");
  return v;
}

}  // namespace

SampleStore run_ensemble(const TargetSpec& target, const SamplerParams& params, const EnsembleOptions& opts) {
  if (opts.n_chains < 1) throw DomainError("n_chains must be >= 1");
  const Sampler sampler(target, params);
  const Index d = target.d(), m = target.m();
  const InitSpec& init = opts.init;
  if (init.kind == InitSpec::Kind::states) {
    if (init.states.size() != opts.n_chains) throw DimensionError("init states count != n_chains");
    for (const auto& s : init.states)
      if (s.x.size() != d || s.x_prev.size() != d || s.y.size() != m)
        throw DimensionError("init state dimensions do not match target");
  }
  const Vec x0 = init.kind == InitSpec::Kind::states ? Vec() : or_zeros(init.x0, d, "x0");
  const Vec y0 = init.kind == InitSpec::Kind::states ? Vec() : or_zeros(init.y0, m, "y0");

  SampleStore store(d, m, opts.n_chains, record_schedule(opts.n_steps, opts.burn_in, opts.thinning), opts.record_dual);
  store.final_states.resize(opts.n_chains);
  const auto& sched = store.record_steps();

  parallel_blocks(opts.n_chains, opts.workers, [&](std::size_t begin, std::size_t end) {
    auto ws = sampler.workspace();
    for (std::size_t c = begin; c < end; ++c) {
      ChainRng rng(params.seed, c);
      ChainState s;
      if (init.kind == InitSpec::Kind::states) {
        s = init.states[c];
        s.n = 0;
      } else {
        Vec x = x0, y = y0;
        if (init.kind == InitSpec::Kind::gaussian) {
          for (Index i = 0; i < d; ++i) x[i] += init.x_std * rng.normal();
          for (Index i = 0; i < m; ++i) y[i] += init.y_std * rng.normal();
        }
        s = ChainState::start(std::move(x), std::move(y));
      }
      std::size_t r = 0;
      for (std::uint64_t n = 0;; ++n) {
        if (r < sched.size() && sched[r] == n) {
          if (!s.x.allFinite() || !s.y.allFinite())
            throw DomainError("chain " + std::to_string(c) + " became non-finite at step " + std::to_string(n));
          store.x_mut(r, c) = s.x;
          if (opts.record_dual) store.y_mut(r, c) = s.y;
          ++r;
        }
        if (n == opts.n_steps) break;
        sampler.step(s, rng, ws);
      }
      if (!s.x.allFinite() || !s.y.allFinite())
        throw DomainError("chain " + std::to_string(c) + " became non-finite");
      store.final_states[c] = std::move(s);
    }
  });
  return store;
}

}  // namespace pdl
