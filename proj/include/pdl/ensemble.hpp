#pragma once

#include <cstdint>
#include <vector>

#include "pdl/samplers.hpp"

namespace pdl {

struct InitSpec {
  enum class Kind { point, gaussian, states };
  Kind kind = Kind::point;
  Vec x0;  // empty means zeros
  Vec y0;
  double x_std = 0.0;
  double y_std = 0.0;
  std::vector<ChainState> states;  // one per chain

  static InitSpec point(Vec x0 = {}, Vec y0 = {});
  static InitSpec gaussian(double x_std, double y_std, Vec x0 = {}, Vec y0 = {});
  static InitSpec given(std::vector<ChainState> states);
};

struct EnsembleOptions {
  std::size_t n_chains = 1;
  std::uint64_t n_steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thinning = 1;
  InitSpec init;
  bool record_dual = true;
  unsigned workers = 1;  // 0: hardware concurrency
};

// Thinned samples, record-major: record r holds one (x, y) per chain taken
// at iteration record_steps[r].
class SampleStore {
 public:
  SampleStore() = default;
  SampleStore(Index d, Index m, std::size_t n_chains, std::vector<std::uint64_t> record_steps, bool has_dual);

  Index d() const { return d_; }
  Index m() const { return m_; }
  std::size_t n_chains() const { return n_chains_; }
  std::size_t n_records() const { return steps_.size(); }
  std::size_t n_samples() const { return n_records() * n_chains_; }
  bool has_dual() const { return has_dual_; }
  const std::vector<std::uint64_t>& record_steps() const { return steps_; }

  Eigen::Map<const Vec> x(std::size_t record, std::size_t chain) const;
  Eigen::Map<const Vec> y(std::size_t record, std::size_t chain) const;
  Eigen::Map<Vec> x_mut(std::size_t record, std::size_t chain);
  Eigen::Map<Vec> y_mut(std::size_t record, std::size_t chain);

  // Columns are samples, ordered record-major.
  Mat primal_matrix() const;
  Mat dual_matrix() const;
  Mat primal_at(std::size_t record) const;  // d x n_chains

  std::vector<ChainState> final_states;

  bool operator==(const SampleStore& o) const;

 private:
  Index d_ = 0, m_ = 0;
  std::size_t n_chains_ = 0;
  std::vector<std::uint64_t> steps_;
  bool has_dual_ = true;
  std::vector<double> xs_, ys_;
};

// Iterations n in [0, n_steps] kept by (burn_in, thinning).
std::vector<std::uint64_t> record_schedule(std::uint64_t n_steps, std::uint64_t burn_in, std::uint64_t thinning);

// Chain i uses ChainRng(params.seed, i); initial Gaussian draws come from
// the same stream. Output does not depend on options.workers.
SampleStore run_ensemble(const TargetSpec& target, const SamplerParams& params, const EnsembleOptions& opts);

// Runs fn(begin, end) over contiguous blocks of [0, n) on `workers` threads
// and rethrows the first exception.
void parallel_blocks(std::size_t n, unsigned workers, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace pdl
