#include "pdl/coupling.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pdl/analytic.hpp"
#include "pdl/assignment.hpp"
#include "pdl/errors.hpp"

namespace pdl {

std::optional<std::size_t> CouplingTrace::contraction_violation(double rel_tol, double floor) const {
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    if (records[i].delta <= floor) continue;
    const double bound = theta * records[i].delta;
    if (records[i + 1].delta > bound + rel_tol * std::abs(bound)) return i;
  }
  return std::nullopt;
}

double CouplingTrace::stability_constant() const {
  const double q = 1.0 - tau * sigma * L * L;
  if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(q);
}

namespace {

CouplingRecord measure(const CouplingTrace& t, const LinearMap& K, double lambda, const ChainState& a,
                       const ChainState& b, Vec& kbuf) {
  const Vec U = a.x - b.x;
  const Vec dU = U - (a.x_prev - b.x_prev);
  const Vec V = a.y - b.y;
  K.apply(dU, kbuf);
  CouplingRecord r;
  r.n = a.n;
  const double u2 = U.squaredNorm(), v2 = V.squaredNorm();
  r.primal = (1.0 / t.tau + 2.0 * t.omega_g) * u2;
  r.increment = dU.squaredNorm() / t.tau;
  r.dual = (1.0 / t.sigma + 2.0 * t.omega_fstar) * v2;
  r.cross = 2.0 * kbuf.dot(V);
  r.delta = r.primal + r.increment + r.dual + r.cross;
  r.stability = u2 / t.tau + (1.0 - t.tau * t.sigma * t.L * t.L) * v2 / t.sigma;
  r.transport = std::sqrt(u2 + v2 / lambda);
  return r;
}

void check_state(const ChainState& s, const TargetSpec& target, const char* which) {
  if (s.x.size() != target.d() || s.x_prev.size() != target.d() || s.y.size() != target.m())
    throw DimensionError(std::string("coupled pair: ") + which + " state dimensions do not match target");
}

}  // namespace

CouplingTrace run_coupled_pair(const TargetSpec& target, const SamplerParams& params, const ChainState& init_a,
                               const ChainState& init_b, std::uint64_t n_steps) {
  if (!is_ulpda(params.method)) throw DomainError("run_coupled_pair: requires a ULPDA method");
  check_state(init_a, target, "first");
  check_state(init_b, target, "second");
  const Sampler smp(target, params);
  const auto& rep = smp.report();
  CouplingTrace t;
  t.tau = rep.tau;
  t.sigma = rep.sigma;
  t.theta = rep.theta;
  t.L = rep.L;
  t.omega_g = rep.omega_g;
  t.omega_fstar = rep.omega_fstar;
  t.records.reserve(n_steps + 1);

  ChainState a = init_a, b = init_b;
  a.n = b.n = 0;
  auto wa = smp.workspace(), wb = smp.workspace();
  Vec xi(smp.noise_dim()), kbuf(target.m());
  ChainRng rng(params.seed, 0);
  auto same = [](const ChainState& p, const ChainState& q) { return p.x == q.x && p.y == q.y && p.x_prev == q.x_prev; };
  t.identical_chains = same(a, b);
  t.records.push_back(measure(t, target.K, params.lambda, a, b, kbuf));
  for (std::uint64_t n = 0; n < n_steps; ++n) {
    rng.fill_normal(xi);
    smp.step(a, xi, wa);
    smp.step(b, xi, wb);
    t.identical_chains = t.identical_chains && same(a, b);
    t.records.push_back(measure(t, target.K, params.lambda, a, b, kbuf));
    if (!std::isfinite(t.records.back().delta)) throw DomainError("run_coupled_pair: non-finite distance");
  }
  return t;
}

double fit_contraction_rate(const CouplingTrace& trace, std::size_t burn) {
  if (trace.records.size() < burn + 3) throw DomainError("fit_contraction_rate: trace too short for burn");
  double sn = 0, sl = 0, snn = 0, snl = 0;
  double cnt = 0;
  for (std::size_t i = burn; i < trace.records.size(); ++i) {
    const double dl = trace.records[i].delta;
    if (!(dl > 0.0)) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(trace.records[i].n), l = std::log(dl);
    sn += n;
    sl += l;
    snn += n * n;
    snl += n * l;
    cnt += 1;
  }
  return (cnt * snl - sn * sl) / (cnt * snn - sn * sn);
}

CoupledTransport coupled_transport(const TargetSpec& target, const SamplerParams& params, const Mat& xa, const Mat& ya,
                                   const Mat& xb, const Mat& yb, std::uint64_t n_steps) {
  const Index n = xa.cols(), d = target.d(), m = target.m();
  if (xb.cols() != n || ya.cols() != n || yb.cols() != n) throw DimensionError("coupled_transport: cloud sizes differ");
  if (xa.rows() != d || xb.rows() != d || ya.rows() != m || yb.rows() != m)
    throw DimensionError("coupled_transport: cloud dimensions do not match target");
  if (!is_ulpda(params.method)) throw DomainError("coupled_transport: requires a ULPDA method");
  const Sampler smp(target, params);
  const double wy = 1.0 / params.lambda;
  const WeightedNorm norm{1.0, wy, d};

  Mat za(d + m, n), zb(d + m, n);
  za << xa, ya;
  zb << xb, yb;
  CoupledTransport out;
  out.initial = w2_exact(EmpiricalMeasure(za), EmpiricalMeasure(zb), norm, std::max<Index>(n, kDefaultW2Cap));
  Mat cost(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      cost(i, j) = (xa.col(i) - xb.col(j)).squaredNorm() + wy * (ya.col(i) - yb.col(j)).squaredNorm();
  const auto pair = solve_assignment(cost);

  Mat ta(d + m, n), tb(d + m, n);
  double acc = 0.0;
  auto ws_a = smp.workspace(), ws_b = smp.workspace();
  Vec xi(smp.noise_dim());
  for (Index i = 0; i < n; ++i) {
    const Index j = pair[static_cast<std::size_t>(i)];
    ChainState a = ChainState::start(xa.col(i), ya.col(i));
    ChainState b = ChainState::start(xb.col(j), yb.col(j));
    ChainRng rng(params.seed, static_cast<std::uint64_t>(i));
    for (std::uint64_t s = 0; s < n_steps; ++s) {
      rng.fill_normal(xi);
      smp.step(a, xi, ws_a);
      smp.step(b, xi, ws_b);
    }
    ta.col(i) << a.x, a.y;
    tb.col(i) << b.x, b.y;
    acc += (a.x - b.x).squaredNorm() + wy * (a.y - b.y).squaredNorm();
  }
  out.terminal = w2_exact(EmpiricalMeasure(ta), EmpiricalMeasure(tb), norm, std::max<Index>(n, kDefaultW2Cap));
  out.terminal_coupled = std::sqrt(acc / static_cast<double>(n));
  const double q = 1.0 - smp.report().tau * smp.report().sigma * smp.report().L * smp.report().L;
  out.constant = q > 0.0 ? 1.0 / std::sqrt(q) : std::numeric_limits<double>::infinity();
  return out;
}

namespace {

std::uint64_t steps_for(double time, double tau) {
  return static_cast<std::uint64_t>(std::llround(std::max(0.0, time) / tau));
}

// Sums of the first primal coordinate over two consecutive windows.
struct Moments1 {
  double n = 0, s1 = 0, s2 = 0;
  void add(double x) {
    n += 1;
    s1 += x;
    s2 += x * x;
  }
  void merge(const Moments1& o) {
    n += o.n;
    s1 += o.s1;
    s2 += o.s2;
  }
  double mean() const { return s1 / n; }
  double var() const { return std::max(0.0, (s2 - s1 * s1 / n) / (n - 1)); }
};

struct ChainSums {
  Moments1 coarse[2];
  Moments1 fine[2];
};

struct PointResult {
  double w2 = 0.0;
  double gap = 0.0;
  double gap_se = 0.0;
};

// Standard error of the window gap from the spread of per-chain window
// differences (chains are independent). Delta method for the variance.
double window_gap_se(const std::vector<ChainSums>& sums, double mean, double scale) {
  const double n = static_cast<double>(sums.size());
  if (n < 2) return 0.0;
  double a1 = 0, a2 = 0, b1 = 0, b2 = 0;
  for (const auto& s : sums) {
    const auto& w0 = s.coarse[0];
    const auto& w1 = s.coarse[1];
    if (w0.n == 0 || w1.n == 0) return 0.0;
    const double dm = w0.mean() - w1.mean();
    const double dv = (w0.s2 / w0.n - w1.s2 / w1.n) - 2.0 * mean * dm;
    a1 += dm, a2 += dm * dm, b1 += dv, b2 += dv * dv;
  }
  const double var_m = (a2 - a1 * a1 / n) / (n - 1) / n;
  const double var_v = (b2 - b1 * b1 / n) / (n - 1) / n;
  // W2 between the window Gaussians moves with dm and with dv / (2 sd)
  return std::sqrt(std::max(0.0, var_m) + std::max(0.0, var_v) / (4.0 * scale * scale)) / scale;
}

PointResult gaussian_point(const TargetSpec& target, const SamplerParams& params, const GaussianReference& ref,
                           const SweepOptions& opts) {
  if (target.d() != 1) throw DimensionError("Gaussian sweep reference requires a one-dimensional primal");
  const int R = opts.refinement;
  const Sampler coarse(target, params);
  std::optional<Sampler> fine;
  if (R >= 2) {
    SamplerParams pf = params;
    pf.tau = params.tau / R;
    fine.emplace(target, pf);
  }
  const double tau = params.tau;
  const std::uint64_t nb = steps_for(opts.burn_in_time, tau), ns = std::max<std::uint64_t>(2, steps_for(opts.sample_time, tau));
  const std::uint64_t every = std::max<std::uint64_t>(1, steps_for(opts.record_interval, tau));
  std::vector<ChainSums> sums(opts.n_chains);

  parallel_blocks(opts.n_chains, opts.workers, [&](std::size_t b, std::size_t e) {
    auto wc = coarse.workspace();
    std::optional<Sampler::Workspace> wf;
    if (fine) wf = fine->workspace();
    const Index nd = coarse.noise_dim();
    Vec xi(nd), xj(nd);
    const double inv_sqrt_r = R >= 2 ? 1.0 / std::sqrt(static_cast<double>(R)) : 1.0;
    for (std::size_t c = b; c < e; ++c) {
      ChainRng rng(params.seed, c);
      ChainState sc = ChainState::start(Vec::Zero(target.d()), Vec::Zero(target.m()));
      ChainState sf = sc;
      for (std::uint64_t n = 0; n < nb + ns; ++n) {
        if (fine) {
          xi.setZero();
          for (int j = 0; j < R; ++j) {
            rng.fill_normal(xj);
            fine->step(sf, xj, *wf);
            xi += xj;
          }
          xi *= inv_sqrt_r;
          coarse.step(sc, xi, wc);
        } else {
          coarse.step(sc, rng, wc);
        }
        if (n >= nb && (n - nb) % every == 0) {
          const int w = (n - nb) < ns / 2 ? 0 : 1;
          sums[c].coarse[w].add(sc.x[0]);
          if (fine) sums[c].fine[w].add(sf.x[0]);
        }
      }
      if (!std::isfinite(sc.x[0]) || !std::isfinite(sf.x[0])) throw DomainError("sweep chain became non-finite");
    }
  });

  Moments1 cw[2], fw[2], ct, ft;
  for (const auto& s : sums)
    for (int w = 0; w < 2; ++w) {
      cw[w].merge(s.coarse[w]);
      fw[w].merge(s.fine[w]);
    }
  for (int w = 0; w < 2; ++w) {
    ct.merge(cw[w]);
    ft.merge(fw[w]);
  }
  PointResult out;
  out.gap = gaussian_w2_1d(cw[0].mean(), cw[0].var(), cw[1].mean(), cw[1].var()) / std::sqrt(ref.variance);
  out.gap_se = window_gap_se(sums, ct.mean(), std::sqrt(ref.variance));
  if (fine) {
    const double k = static_cast<double>(R) / (R - 1.0);
    const double dm = k * (ct.mean() - ft.mean()), dv = k * (ct.var() - ft.var());
    out.w2 = gaussian_w2_1d(ref.mean + dm, std::max(0.0, ref.variance + dv), ref.mean, ref.variance);
  } else {
    out.w2 = gaussian_w2_1d(ct.mean(), ct.var(), ref.mean, ref.variance);
  }
  return out;
}

Mat spaced_columns(const Mat& m, Index n) {
  if (m.cols() <= n) return m;
  Mat out(m.rows(), n);
  for (Index i = 0; i < n; ++i) out.col(i) = m.col(i * m.cols() / n);
  return out;
}

double cloud_w2(const Mat& a, const Mat& b) {
  if (a.rows() == 1) return w2_1d(EmpiricalMeasure(a), EmpiricalMeasure(b));
  const Index n = std::min({a.cols(), b.cols(), kDefaultW2Cap});
  return w2_exact(EmpiricalMeasure(spaced_columns(a, n)), EmpiricalMeasure(spaced_columns(b, n)));
}

PointResult empirical_point(const TargetSpec& target, const SamplerParams& params, const EmpiricalMeasure& ref,
                            const SweepOptions& opts) {
  if (ref.dim() != target.d()) throw DimensionError("sweep reference dimension differs from the primal");
  EnsembleOptions eo;
  eo.n_chains = opts.n_chains;
  eo.burn_in = steps_for(opts.burn_in_time, params.tau);
  eo.n_steps = eo.burn_in + std::max<std::uint64_t>(2, steps_for(opts.sample_time, params.tau));
  eo.thinning = std::max<std::uint64_t>(1, steps_for(opts.record_interval, params.tau));
  eo.record_dual = false;
  eo.workers = opts.workers;
  const SampleStore store = run_ensemble(target, params, eo);
  const Mat all = store.primal_matrix();
  const std::size_t half = store.n_records() / 2;
  if (half == 0) throw DomainError("sweep: need at least two records for the stationarity check");
  const Index split = static_cast<Index>(half * store.n_chains());
  const Mat A = all.leftCols(split), B = all.middleCols(split, split);
  const Vec mean = ref.points().rowwise().mean();
  const double scale = std::sqrt((ref.points().colwise() - mean).squaredNorm() / static_cast<double>(ref.size()));
  PointResult out;
  out.w2 = cloud_w2(all, ref.points());
  out.gap = cloud_w2(A, B) / std::max(scale, std::numeric_limits<double>::min());
  return out;
}

PointResult run_point(const TargetSpec& target, const SamplerParams& params, const SweepReference& ref,
                      const SweepOptions& opts) {
  if (opts.n_chains < 1) throw DomainError("sweep: n_chains must be >= 1");
  if (const auto* g = std::get_if<GaussianReference>(&ref)) {
    if (!(g->variance > 0.0)) throw DomainError("sweep: reference variance must be positive");
    return gaussian_point(target, params, *g, opts);
  }
  return empirical_point(target, params, std::get<EmpiricalMeasure>(ref), opts);
}

// The window gap must exceed the tolerance by more than its own Monte
// Carlo noise.
bool nonstationary(const PointResult& pr, const SweepOptions& opts) {
  return pr.gap > opts.stationarity_tol + 3.0 * pr.gap_se;
}

double loglog_slope(const std::vector<SweepRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto& r : rows) {
    if (!(r.w2 > 0.0) || !std::isfinite(r.value)) continue;
    const double x = std::log(r.value), y = std::log(r.w2);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::string SweepResult::to_csv(const std::string& value_name) const {
  std::ostringstream os;
  os.precision(10);
  os << value_name << ",tau,w2,slope,window_gap,window_gap_se,flags\n";
  for (const auto& r : rows)
    os << r.value << "," << r.tau << "," << r.w2 << "," << slope << "," << r.window_gap << "," << r.window_gap_se << ","
       << r.flags << "\n";
  return os.str();
}

SweepResult bias_sweep_tau(const TargetSpec& target, const SamplerParams& base, const std::vector<double>& taus,
                           const SweepReference& reference, const SweepOptions& opts) {
  if (taus.empty()) throw DomainError("bias_sweep_tau: no step sizes");
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (!(taus[i] < taus[i - 1])) throw DomainError("bias_sweep_tau: taus must be decreasing");
  if (opts.refinement >= 2 && !std::holds_alternative<GaussianReference>(reference))
    throw DomainError("bias_sweep_tau: coupled refinement needs a Gaussian reference");
  // Reject every regime violation before running anything.
  for (double t : taus) {
    SamplerParams p = base;
    p.tau = t;
    validate_params(target, p);
  }
  SweepResult res;
  for (double t : taus) {
    SamplerParams p = base;
    p.tau = t;
    const PointResult pr = run_point(target, p, reference, opts);
    res.rows.push_back({t, t, pr.w2, pr.gap, pr.gap_se, nonstationary(pr, opts) ? "nonstationary" : "ok"});
  }
  res.slope = loglog_slope(res.rows);
  return res;
}

SweepResult lambda_sweep(const TargetSpec& target, const SamplerParams& base, const std::vector<double>& lambdas,
                         const std::function<double(double)>& tau_rule, const SweepReference& reference,
                         const SweepOptions& opts) {
  if (lambdas.empty()) throw DomainError("lambda_sweep: no lambdas");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) throw DomainError("lambda_sweep: lambdas must be increasing");
  if (opts.refinement >= 2) throw DomainError("lambda_sweep: coupled refinement is only defined for tau sweeps");
  auto params_for = [&](double l) {
    SamplerParams p = base;
    p.tau = tau_rule(l);
    if (std::isinf(l)) {
      p.method = Method::prox_sub;
    } else {
      p.lambda = l;
    }
    return p;
  };
  for (double l : lambdas) validate_params(target, params_for(l));
  SweepResult res;
  for (double l : lambdas) {
    const SamplerParams p = params_for(l);
    const PointResult pr = run_point(target, p, reference, opts);
    std::string flags = nonstationary(pr, opts) ? "nonstationary" : "ok";
    if (!res.rows.empty() && pr.w2 > res.rows.back().w2) flags += ";increase";
    res.rows.push_back({l, p.tau, pr.w2, pr.gap, pr.gap_se, flags});
  }
  res.slope = loglog_slope(res.rows);
  return res;
}

double dual_residual_variance(const SampleStore& store, const TargetSpec& target) {
  if (!target.f_subgrad) throw DomainError("dual_residual_variance: target has no f_subgrad");
  if (!store.has_dual()) throw DomainError("dual_residual_variance: store has no dual samples");
  if (store.n_samples() < 2) throw DomainError("dual_residual_variance: needs at least 2 samples");
  const Index m = target.m();
  Mat res(m, static_cast<Index>(store.n_samples()));
  Vec kx(m), sg(m);
  Index col = 0;
  for (std::size_t r = 0; r < store.n_records(); ++r)
    for (std::size_t c = 0; c < store.n_chains(); ++c) {
      target.K.apply(store.x(r, c), kx);
      (*target.f_subgrad)(kx, sg);
      res.col(col++) = store.y(r, c) - sg;
    }
  return coordinate_variance(res).mean();
}

}  // namespace pdl
