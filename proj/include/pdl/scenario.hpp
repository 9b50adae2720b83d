#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "pdl/analytic.hpp"
#include "pdl/config.hpp"
#include "pdl/ensemble.hpp"
#include "pdl/image.hpp"
#include "pdl/samplers.hpp"

namespace pdl {

struct StepSizes {
  double tau = 0.0;
  double sigma = 0.0;
};
// Solves sigma/tau = lambda and sigma*tau*k^2 = c.
StepSizes gauss1d_stepsizes(double lambda, double k, double c);

// SHA-1 of "blob <size>\0<bytes>", hex.
std::string git_blob_hash(const std::string& bytes);

struct ProblemSetup {
  TargetSpec target;
  SamplerParams params;
  ImageGrid clean;  // image scenarios only
  ImageGrid noisy;
  Vec x0, y0;
};
ProblemSetup build_problem(const ScenarioConfig& cfg);

// Prox-Sub cloud at tau/refinement: ref_chains chains, burn-in, then
// snapshots every ref_spacing time units until ref_samples are collected.
Mat tv2pixel_reference(const TargetSpec& target, double tau, const ScenarioConfig& cfg, const Vec& x0);

struct W2Curve {
  std::vector<double> time;
  std::vector<double> w2;
  std::vector<double> stderr_;  // spread over subsample pairs
  bool plateau = false;
};
// W2 of each recorded cloud (skipping record 0) against the reference,
// averaged over `subsamples` disjoint subsample pairs of size `points`.
W2Curve w2_curve(const SampleStore& store, double tau, const Mat& reference, Index points, int subsamples);

struct ImageSummary {
  ImageGrid mmse;
  ImageGrid variance;
  ImageGrid dual_dispersion;
  double psnr_noisy = 0.0;
  double psnr_mmse = 0.0;
  double mean_variance = 0.0;
  double mean_dual_dispersion = 0.0;
};
// Primal pixels are the first w*h coordinates. Dual dispersion of a pixel
// is the summed variance of its channels; `dual_groups` lists the channel
// count per pixel for each consecutive dual block.
ImageSummary summarize_image_run(const SampleStore& store, const ImageGrid& clean, const ImageGrid& noisy,
                                 const std::vector<Index>& dual_groups);

nlohmann::json validation_json(const ValidationReport& r);
nlohmann::json validate_scenario(const ScenarioConfig& cfg);
nlohmann::json gauss1d_oracle(const GaussModel1D& m, double c);

// Runs the scenario, writes outputs under cfg.output_dir, returns the manifest.
nlohmann::json run_scenario(const ScenarioConfig& cfg);

}  // namespace pdl
