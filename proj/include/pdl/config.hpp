#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdl/samplers.hpp"

namespace pdl {

using KeyValues = std::map<std::string, std::string>;

// Flat `key = value` text, `#` starts a comment.
KeyValues parse_key_values(std::istream& in, const std::string& source);
KeyValues load_key_values(const std::string& path);
// Accepts "key=value" or "--key=value".
void apply_override(KeyValues& kv, const std::string& assignment);

enum class Scenario { gauss1d, tv2pixel, tv_image, tgv_image, sweep };
std::string to_string(Scenario s);

struct ScenarioConfig {
  Scenario scenario = Scenario::gauss1d;
  Method sampler = Method::ulpda_outer;
  std::optional<double> tau;  // gauss1d derives it from step_c when absent
  double lambda = 1.0;
  double theta = 1.0;
  double alpha = 10.0;
  std::optional<double> alpha0;  // TGV; default 2 * alpha1
  std::optional<double> alpha1;  // TGV; default alpha
  double sigma_eps = 0.25;
  std::size_t n_chains = 100;
  std::uint64_t n_steps = 1000;
  std::uint64_t burn_in = 0;
  std::uint64_t thinning = 1;
  std::uint64_t seed = 1;
  std::string input_image;
  std::string output_dir = "out";

  // gauss1d / sweep
  double c_f = 1.0, c_g = 2.0, k = 1.5;
  double step_c = 1e-4;
  int hist_bins = 60;
  Mat b_x, b_y;  // ulpda_general, row-major lists "a,b;c,d"

  // tv2pixel
  double obs1 = 0.0, obs2 = 1.0;
  int checkpoints = 20;
  int ref_refinement = 16;
  std::size_t ref_samples = 100000;
  std::size_t ref_chains = 1000;
  double ref_burn_time = 1.0;
  double ref_spacing = 0.1;
  Index w2_points = 1000;
  int w2_subsamples = 4;

  // images
  Index width = 32, height = 32;
  std::uint64_t noise_seed = 7;

  // sweep
  std::string sweep_kind = "lambda";  // lambda | tau
  std::vector<double> sweep_values;
  bool sweep_prox_sub = true;
  int refinement = 0;
  double burn_in_time = 10.0;
  double sample_time = 50.0;
  double record_interval = 0.05;

  unsigned workers = 1;

  KeyValues raw;  // resolved key/value view, for the manifest
};

ScenarioConfig parse_config(const KeyValues& kv);
std::vector<std::string> known_config_keys();

}  // namespace pdl
