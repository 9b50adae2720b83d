#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdl/ensemble.hpp"
#include "pdl/metrics.hpp"
#include "pdl/samplers.hpp"

namespace pdl {

// Distances between two chains driven by the same noise, with U = X - X~
// and V = Y - Y~.
struct CouplingRecord {
  std::uint64_t n = 0;
  double primal = 0.0;     // |U^n|^2 weighted by 1/tau + 2 omega_g
  double increment = 0.0;  // |U^n - U^{n-1}|^2 / tau
  double dual = 0.0;       // |V^n|^2 weighted by 1/sigma + 2 omega_f*
  double cross = 0.0;      // 2 <K (U^n - U^{n-1}), V^n>
  double delta = 0.0;      // primal + increment + dual + cross
  double stability = 0.0;  // |U|^2/tau + (1 - tau sigma L^2) |V|^2/sigma
  double transport = 0.0;  // sqrt(|U|^2 + |V|^2 / lambda)
};

struct CouplingTrace {
  double tau = 0.0, sigma = 0.0, theta = 0.0, L = 0.0;
  double omega_g = 0.0, omega_fstar = 0.0;
  std::vector<CouplingRecord> records;

  // First n with delta[n+1] > theta * delta[n] * (1 + rel_tol), if any.
  // Steps with delta[n] <= floor are skipped: once the chains agree to
  // roundoff the ratio carries no information.
  std::optional<std::size_t> contraction_violation(double rel_tol, double floor = 0.0) const;
  // (1 - tau sigma L^2)^{-1/2}
  double stability_constant() const;
  bool identical_chains = true;  // bitwise equal states at every step
};

// Requires a ULPDA method; validate_params errors propagate.
CouplingTrace run_coupled_pair(const TargetSpec& target, const SamplerParams& params, const ChainState& init_a,
                               const ChainState& init_b, std::uint64_t n_steps);

// Least-squares slope of log delta against n over records n >= burn.
// -infinity if any delta there is <= 0.
double fit_contraction_rate(const CouplingTrace& trace, std::size_t burn);

// Ensemble version of the weighted transport distance T_{1,1/lambda}:
// chain clouds are paired by the optimal initial assignment and each pair
// shares its noise.
struct CoupledTransport {
  double initial = 0.0;          // exact T between initial clouds
  double terminal = 0.0;         // exact T between terminal clouds
  double terminal_coupled = 0.0; // root-mean-square pair distance at the end
  double constant = 0.0;         // (1 - tau sigma L^2)^{-1/2}
};
CoupledTransport coupled_transport(const TargetSpec& target, const SamplerParams& params, const Mat& xa, const Mat& ya,
                                   const Mat& xb, const Mat& yb, std::uint64_t n_steps);

// Primal reference for one-dimensional sweeps.
struct GaussianReference {
  double mean = 0.0;
  double variance = 1.0;
};
using SweepReference = std::variant<GaussianReference, EmpiricalMeasure>;

struct SweepOptions {
  std::size_t n_chains = 1000;
  double burn_in_time = 10.0;
  double sample_time = 50.0;
  double record_interval = 0.05;  // time between kept samples
  std::uint64_t seed = 1;
  // A point is flagged when window_gap > stationarity_tol + 3 window_gap_se.
  double stationarity_tol = 1e-2;
  unsigned workers = 1;
  // >= 2: estimate the tau-bias against the same sampler at tau/refinement
  // driven by the summed noise, then anchor on a Gaussian reference.
  int refinement = 0;
};

struct SweepRow {
  double value = 0.0;  // tau or lambda
  double tau = 0.0;
  double w2 = 0.0;
  double window_gap = 0.0;     // W2 between the two halves of the run, relative
  double window_gap_se = 0.0;  // its Monte Carlo standard error (Gaussian reference only)
  std::string flags;           // "ok", "nonstationary", "increase"
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;  // log-log slope of w2 against value
  std::string to_csv(const std::string& value_name) const;
};

// Requires taus decreasing.
SweepResult bias_sweep_tau(const TargetSpec& target, const SamplerParams& base, const std::vector<double>& taus,
                           const SweepReference& reference, const SweepOptions& opts);

// Requires lambdas increasing; lambda = +inf runs Prox-Sub at tau_rule(inf).
SweepResult lambda_sweep(const TargetSpec& target, const SamplerParams& base, const std::vector<double>& lambdas,
                         const std::function<double(double)>& tau_rule, const SweepReference& reference,
                         const SweepOptions& opts);

// Mean over dual coordinates of Var(Y - f_subgrad(K X)).
double dual_residual_variance(const SampleStore& store, const TargetSpec& target);

}  // namespace pdl
