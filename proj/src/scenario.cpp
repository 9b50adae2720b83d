#include "pdl/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pdl/coupling.hpp"
#include "pdl/errors.hpp"
#include "pdl/metrics.hpp"
#include "pdl/problems.hpp"

namespace pdl {

namespace fs = std::filesystem;
using nlohmann::json;

StepSizes gauss1d_stepsizes(double lambda, double k, double c) {
  if (!(c > 0.0) || c > 1.0) throw DomainError("step rule requires 0 < c <= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("step rule requires lambda > 0");
  if (k == 0.0 || !std::isfinite(k)) throw DomainError("step rule requires k != 0");
  StepSizes s;
  s.tau = std::sqrt(c / lambda) / std::abs(k);
  s.sigma = lambda * s.tau;
  return s;
}

std::string git_blob_hash(const std::string& bytes) {
  const std::string payload = "blob " + std::to_string(bytes.size()) + std::string(1, '\0') + bytes;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(payload.data(), payload.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw Error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

GaussModel1D model_of(const ScenarioConfig& cfg) { return {cfg.c_f, cfg.c_g, cfg.k, cfg.lambda}; }

std::uint64_t steps_for(double time, double tau) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(time / tau)));
}

ImageGrid clean_image(const ScenarioConfig& cfg) {
  return cfg.input_image.empty() ? make_phantom(cfg.width, cfg.height) : load_image_pgm(cfg.input_image);
}

}  // namespace

ProblemSetup build_problem(const ScenarioConfig& cfg) {
  ProblemSetup p;
  SamplerParams& sp = p.params;
  sp.lambda = cfg.lambda;
  sp.theta = cfg.theta;
  sp.method = cfg.sampler;
  sp.seed = cfg.seed;
  sp.b_x = cfg.b_x;
  sp.b_y = cfg.b_y;
  switch (cfg.scenario) {
    case Scenario::gauss1d:
    case Scenario::sweep: {
      const GaussModel1D m = model_of(cfg);
      p.target = gauss1d_target(m);
      sp.tau = cfg.tau ? *cfg.tau : gauss1d_stepsizes(cfg.lambda, cfg.k, cfg.step_c).tau;
      p.x0 = Vec::Zero(1);
      p.y0 = Vec::Zero(1);
      break;
    }
    case Scenario::tv2pixel: {
      const Vec obs = (Vec(2) << cfg.obs1, cfg.obs2).finished();
      p.target = tv2pixel_target(obs, cfg.sigma_eps, cfg.alpha);
      sp.tau = *cfg.tau;
      p.x0 = obs;
      p.y0 = Vec::Zero(1);
      break;
    }
    case Scenario::tv_image: {
      p.clean = clean_image(cfg);
      p.noisy = add_gaussian_noise(p.clean, cfg.sigma_eps, cfg.noise_seed);
      p.target = tv_image_target(p.noisy, cfg.sigma_eps, cfg.alpha);
      sp.tau = *cfg.tau;
      p.x0 = p.noisy.vec();
      p.y0 = Vec::Zero(p.target.m());
      break;
    }
    case Scenario::tgv_image: {
      p.clean = clean_image(cfg);
      p.noisy = add_gaussian_noise(p.clean, cfg.sigma_eps, cfg.noise_seed);
      const double a1 = cfg.alpha1 ? *cfg.alpha1 : cfg.alpha;
      const double a0 = cfg.alpha0 ? *cfg.alpha0 : 2.0 * a1;
      p.target = tgv_image_target(p.noisy, cfg.sigma_eps, a1, a0);
      sp.tau = *cfg.tau;
      p.x0 = Vec::Zero(p.target.d());
      p.x0.head(p.noisy.size()) = p.noisy.vec();
      p.y0 = Vec::Zero(p.target.m());
      break;
    }
  }
  return p;
}

Mat tv2pixel_reference(const TargetSpec& target, double tau, const ScenarioConfig& cfg, const Vec& x0) {
  SamplerParams p;
  p.method = Method::prox_sub;
  p.tau = tau / cfg.ref_refinement;
  p.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
  EnsembleOptions eo;
  eo.n_chains = cfg.ref_chains;
  eo.burn_in = steps_for(cfg.ref_burn_time, p.tau);
  eo.thinning = steps_for(cfg.ref_spacing, p.tau);
  const std::uint64_t snaps = (cfg.ref_samples + cfg.ref_chains - 1) / cfg.ref_chains;
  eo.n_steps = eo.burn_in + (snaps - 1) * eo.thinning;
  eo.init = InitSpec::point(x0, Vec::Zero(target.m()));
  eo.record_dual = false;
  eo.workers = cfg.workers;
  return run_ensemble(target, p, eo).primal_matrix();
}

W2Curve w2_curve(const SampleStore& store, double tau, const Mat& reference, Index points, int subsamples) {
  if (store.n_records() < 2) throw DomainError("w2_curve: needs at least one checkpoint after the start");
  if (subsamples < 1 || points < 1) throw DomainError("w2_curve: points and subsamples must be >= 1");
  const Index nc = static_cast<Index>(store.n_chains());
  const Index P = std::min({points, nc / subsamples, reference.cols() / subsamples});
  if (P < 1) throw DomainError("w2_curve: not enough chains or reference samples for the subsamples");
  W2Curve c;
  for (std::size_t r = 1; r < store.n_records(); ++r) {
    const Mat cloud = store.primal_at(r);
    double s = 0, s2 = 0;
    for (int k = 0; k < subsamples; ++k) {
      const double w = w2_exact(EmpiricalMeasure(cloud.middleCols(k * P, P)),
                                EmpiricalMeasure(reference.middleCols(k * P, P)), std::nullopt,
                                std::max<Index>(P, kDefaultW2Cap));
      s += w;
      s2 += w * w;
    }
    const double K = subsamples, mean = s / K;
    const double var = K > 1 ? std::max(0.0, (s2 - K * mean * mean) / (K - 1)) : 0.0;
    c.time.push_back(static_cast<double>(store.record_steps()[r]) * tau);
    c.w2.push_back(mean);
    c.stderr_.push_back(std::sqrt(var / K));
  }
  // Plateau: the last quarter of the curve agrees with the quarter before.
  const std::size_t n = c.w2.size(), q = std::max<std::size_t>(1, n / 4);
  if (n >= 2 * q) {
    double a = 0, b = 0, sa = 0, sb = 0;
    for (std::size_t i = n - q; i < n; ++i) a += c.w2[i], sa += c.stderr_[i] * c.stderr_[i];
    for (std::size_t i = n - 2 * q; i < n - q; ++i) b += c.w2[i], sb += c.stderr_[i] * c.stderr_[i];
    a /= q, b /= q;
    const double se = std::sqrt(sa + sb) / q;
    c.plateau = std::abs(a - b) <= 0.1 * a + 3.0 * se;
  }
  return c;
}

ImageSummary summarize_image_run(const SampleStore& store, const ImageGrid& clean, const ImageGrid& noisy,
                                 const std::vector<Index>& dual_groups) {
  const Index w = clean.width, h = clean.height, n = w * h;
  ImageSummary s;
  const Mat X = store.primal_matrix();
  s.mmse = ImageGrid::from_vector(w, h, X.topRows(n).rowwise().mean());
  s.variance = pixelwise_variance(store, w, h, 0);
  s.psnr_noisy = psnr(clean, noisy);
  s.psnr_mmse = psnr(clean, s.mmse);
  s.mean_variance = s.variance.vec().mean();
  s.dual_dispersion = ImageGrid(w, h, 0.0);
  if (store.has_dual() && !dual_groups.empty()) {
    const Vec dv = coordinate_variance(store.dual_matrix());
    Index off = 0;
    for (Index g : dual_groups) {
      for (Index p = 0; p < n; ++p) s.dual_dispersion.data[static_cast<std::size_t>(p)] += dv.segment(off + p * g, g).sum();
      off += g * n;
    }
    if (off != dv.size()) throw DimensionError("summarize_image_run: dual groups do not cover the dual vector");
    s.mean_dual_dispersion = s.dual_dispersion.vec().mean();
  }
  return s;
}

json validation_json(const ValidationReport& r) {
  return {{"L", r.L},
          {"tau", r.tau},
          {"sigma", r.sigma},
          {"theta", r.theta},
          {"omega_g", r.omega_g},
          {"omega_fstar", r.omega_fstar},
          {"theta_tau_sigma_L2", r.theta_tau_sigma_L2},
          {"stability_regime", r.stability_regime},
          {"contraction_regime", r.contraction_regime},
          {"bias_regime", r.bias_regime}};
}

json validate_scenario(const ScenarioConfig& cfg) {
  const ProblemSetup p = build_problem(cfg);
  return validation_json(validate_params(p.target, p.params));
}

json gauss1d_oracle(const GaussModel1D& m, double c) {
  auto mat = [](const Eigen::Matrix2d& a) { return json::array({{a(0, 0), a(0, 1)}, {a(1, 0), a(1, 1)}}); };
  const StepSizes st = gauss1d_stepsizes(m.lambda, m.k, c);
  Mat b = Mat::Zero(2, 1);
  b(0, 0) = std::sqrt(2.0);
  return {{"c_f", m.c_f},
          {"c_g", m.c_g},
          {"k", m.k},
          {"lambda", m.lambda},
          {"target_variance", target_variance(m)},
          {"stationary_cov", mat(stationary_cov_pd(m))},
          {"lyapunov_cov", mat(lyapunov_cov(drift_pd(m), b))},
          {"limit_cov", mat(stationary_cov_pd_limit(m))},
          {"modified_cov", mat(modified_stationary_cov(m))},
          {"step_c", c},
          {"tau", st.tau},
          {"sigma", st.sigma}};
}

namespace {

struct Outputs {
  fs::path dir;
  std::vector<std::string> files;

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    f.precision(12);
    files.push_back(name);
    return f;
  }
  void pgm(const ImageGrid& img, const std::string& name) {
    save_image_pgm(img, (dir / name).string());
    files.push_back(name);
  }
};

void check_written(std::ofstream& f, const std::string& what) {
  f.flush();
  if (!f) throw IoError("write failed: " + what);
}

ImageGrid normalized(const ImageGrid& img, double& lo, double& hi) {
  lo = *std::min_element(img.data.begin(), img.data.end());
  hi = *std::max_element(img.data.begin(), img.data.end());
  ImageGrid out = img;
  const double span = hi > lo ? hi - lo : 1.0;
  for (double& v : out.data) v = (v - lo) / span;
  return out;
}

json run_gauss1d(const ScenarioConfig& cfg, const ProblemSetup& p, Outputs& out) {
  EnsembleOptions eo;
  eo.n_chains = cfg.n_chains;
  eo.n_steps = cfg.n_steps;
  eo.burn_in = cfg.burn_in;
  eo.thinning = cfg.thinning;
  eo.init = InitSpec::point(p.x0, p.y0);
  eo.workers = cfg.workers;
  const SampleStore store = run_ensemble(p.target, p.params, eo);
  if (store.n_samples() < 2) throw ConfigError("gauss1d: fewer than 2 samples after burn-in; raise n_steps");
  Mat Z(2, static_cast<Index>(store.n_samples()));
  Z.row(0) = store.primal_matrix();
  Z.row(1) = store.dual_matrix();
  const Moments mo = moments(EmpiricalMeasure(Z));

  const GaussModel1D m = model_of(cfg);
  Eigen::Matrix2d oracle = Eigen::Matrix2d::Constant(std::numeric_limits<double>::quiet_NaN());
  switch (cfg.sampler) {
    case Method::ulpda_outer:
    case Method::ulpda_inner: oracle = stationary_cov_pd(m); break;
    case Method::ulpda_general:
      oracle(0, 0) = general_noise_primal_variance(m, cfg.b_x(0, 0), cfg.b_x(0, 1), cfg.b_y(0, 0), cfg.b_y(0, 1));
      break;
    case Method::ula:
    case Method::prox_sub: oracle(0, 0) = target_variance(m); break;
    case Method::modified_sde: oracle = modified_stationary_cov(m); break;
  }
  {
    auto f = out.open("summary.csv");
    f << "quantity,empirical,oracle\n";
    f << "mean_x," << mo.mean[0] << ",0\n";
    f << "mean_y," << mo.mean[1] << ",0\n";
    f << "var_x," << mo.cov(0, 0) << "," << oracle(0, 0) << "\n";
    f << "var_y," << mo.cov(1, 1) << "," << oracle(1, 1) << "\n";
    f << "cov_xy," << mo.cov(0, 1) << "," << oracle(0, 1) << "\n";
    f << "target_var_x,," << target_variance(m) << "\n";
    check_written(f, "summary.csv");
  }
  {
    const Eigen::RowVectorXd xs = Z.row(0);
    const double lo = xs.minCoeff(), hi = xs.maxCoeff();
    const double width = hi > lo ? (hi - lo) / cfg.hist_bins : 1.0;
    std::vector<std::size_t> counts(static_cast<std::size_t>(cfg.hist_bins), 0);
    for (Index i = 0; i < xs.size(); ++i) {
      auto b = static_cast<std::size_t>((xs[i] - lo) / width);
      counts[std::min(b, counts.size() - 1)]++;
    }
    const double v = target_variance(m);
    auto f = out.open("histogram.csv");
    f << "bin_left,bin_right,count,density,target_density\n";
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const double l = lo + b * width, r = l + width, mid = 0.5 * (l + r);
      f << l << "," << r << "," << counts[b] << "," << counts[b] / (xs.size() * width) << ","
        << std::exp(-mid * mid / (2 * v)) / std::sqrt(2 * M_PI * v) << "\n";
    }
    check_written(f, "histogram.csv");
  }
  return {{"mean_x", mo.mean[0]},
          {"var_x", mo.cov(0, 0)},
          {"var_y", mo.cov(1, 1)},
          {"cov_xy", mo.cov(0, 1)},
          {"oracle_var_x", oracle(0, 0)},
          {"target_variance", target_variance(m)},
          {"n_samples", store.n_samples()}};
}

json run_tv2pixel(const ScenarioConfig& cfg, const ProblemSetup& p, Outputs& out) {
  if (cfg.n_steps < static_cast<std::uint64_t>(cfg.checkpoints))
    throw ConfigError("tv2pixel: n_steps must be >= checkpoints");
  EnsembleOptions eo;
  eo.n_chains = cfg.n_chains;
  eo.n_steps = cfg.n_steps - cfg.n_steps % static_cast<std::uint64_t>(cfg.checkpoints);
  eo.thinning = eo.n_steps / static_cast<std::uint64_t>(cfg.checkpoints);
  eo.init = InitSpec::point(p.x0, p.y0);
  eo.record_dual = false;
  eo.workers = cfg.workers;
  const SampleStore store = run_ensemble(p.target, p.params, eo);
  const Mat ref = tv2pixel_reference(p.target, p.params.tau, cfg, p.x0);
  const W2Curve c = w2_curve(store, p.params.tau, ref, cfg.w2_points, cfg.w2_subsamples);
  {
    auto f = out.open("w2_curve.csv");
    f << "checkpoint,time,w2,stderr\n";
    for (std::size_t i = 0; i < c.w2.size(); ++i) f << i + 1 << "," << c.time[i] << "," << c.w2[i] << "," << c.stderr_[i] << "\n";
    check_written(f, "w2_curve.csv");
  }
  const Moments fin = moments(EmpiricalMeasure(store.primal_at(store.n_records() - 1)));
  const Moments rm = moments(EmpiricalMeasure(ref));
  {
    auto f = out.open("summary.csv");
    f << "coordinate,mean,variance,reference_mean,reference_variance\n";
    for (Index i = 0; i < 2; ++i)
      f << "x" << i + 1 << "," << fin.mean[i] << "," << fin.cov(i, i) << "," << rm.mean[i] << "," << rm.cov(i, i) << "\n";
    check_written(f, "summary.csv");
  }
  return {{"final_w2", c.w2.back()}, {"final_w2_stderr", c.stderr_.back()}, {"plateau", c.plateau},
          {"reference_samples", ref.cols()}};
}

json run_image(const ScenarioConfig& cfg, const ProblemSetup& p, Outputs& out) {
  EnsembleOptions eo;
  eo.n_chains = cfg.n_chains;
  eo.n_steps = cfg.n_steps;
  eo.burn_in = cfg.burn_in;
  eo.thinning = cfg.thinning;
  eo.init = InitSpec::point(p.x0, p.y0);
  eo.workers = cfg.workers;
  const SampleStore store = run_ensemble(p.target, p.params, eo);
  if (store.n_samples() < 2) throw ConfigError("image run: fewer than 2 samples after burn-in; raise n_steps");
  const std::vector<Index> groups =
      cfg.scenario == Scenario::tgv_image ? std::vector<Index>{2, 3} : std::vector<Index>{2};
  const ImageSummary s = summarize_image_run(store, p.clean, p.noisy, groups);
  out.pgm(p.clean, "clean.pgm");
  out.pgm(p.noisy, "noisy.pgm");
  out.pgm(s.mmse, "mmse.pgm");
  ImageGrid logvar = s.variance;
  for (double& v : logvar.data) v = std::log10(std::max(v, 1e-12));
  double vlo, vhi, dlo, dhi;
  out.pgm(normalized(logvar, vlo, vhi), "log10_variance.pgm");
  out.pgm(normalized(s.dual_dispersion, dlo, dhi), "dual_dispersion.pgm");
  {
    auto f = out.open("summary.csv");
    f << "index,row,col,mean,variance,dual_dispersion\n";
    for (Index r = 0; r < p.clean.height; ++r)
      for (Index c = 0; c < p.clean.width; ++c)
        f << r * p.clean.width + c << "," << r << "," << c << "," << s.mmse.at(r, c) << "," << s.variance.at(r, c)
          << "," << s.dual_dispersion.at(r, c) << "\n";
    check_written(f, "summary.csv");
  }
  return {{"psnr_noisy", s.psnr_noisy},
          {"psnr_mmse", s.psnr_mmse},
          {"mean_primal_variance", s.mean_variance},
          {"mean_dual_dispersion", s.mean_dual_dispersion},
          {"log10_variance_range", {vlo, vhi}},
          {"dual_dispersion_range", {dlo, dhi}},
          {"n_samples", store.n_samples()}};
}

json run_sweep(const ScenarioConfig& cfg, const ProblemSetup& p, Outputs& out) {
  const GaussModel1D m = model_of(cfg);
  SweepOptions so;
  so.n_chains = cfg.n_chains;
  so.burn_in_time = cfg.burn_in_time;
  so.sample_time = cfg.sample_time;
  so.record_interval = cfg.record_interval;
  so.seed = cfg.seed;
  so.workers = cfg.workers;
  so.refinement = cfg.refinement;
  SweepResult res;
  std::vector<double> vals = cfg.sweep_values;
  if (cfg.sweep_kind == "lambda") {
    std::sort(vals.begin(), vals.end());
    const double lmax = vals.back();
    if (cfg.sweep_prox_sub) vals.push_back(std::numeric_limits<double>::infinity());
    auto rule = [&](double l) {
      if (cfg.tau) return *cfg.tau;
      return gauss1d_stepsizes(std::isinf(l) ? lmax : l, cfg.k, cfg.step_c).tau;
    };
    res = lambda_sweep(p.target, p.params, vals, rule, GaussianReference{0.0, target_variance(m)}, so);
  } else {
    std::sort(vals.begin(), vals.end(), std::greater<>());
    res = bias_sweep_tau(p.target, p.params, vals, GaussianReference{0.0, stationary_cov_pd(m)(0, 0)}, so);
  }
  {
    auto f = out.open("sweep.csv");
    f << res.to_csv(cfg.sweep_kind);
    check_written(f, "sweep.csv");
  }
  json rows = json::array();
  for (const auto& r : res.rows)
    rows.push_back({{"value", std::isinf(r.value) ? json("inf") : json(r.value)}, {"tau", r.tau}, {"w2", r.w2}, {"flags", r.flags}});
  return {{"slope", res.slope}, {"rows", rows}};
}

}  // namespace

json run_scenario(const ScenarioConfig& cfg) {
  const ProblemSetup p = build_problem(cfg);
  const ValidationReport rep = validate_params(p.target, p.params);

  Outputs out;
  out.dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir + ": " + ec.message());

  json results;
  switch (cfg.scenario) {
    case Scenario::gauss1d: results = run_gauss1d(cfg, p, out); break;
    case Scenario::tv2pixel: results = run_tv2pixel(cfg, p, out); break;
    case Scenario::tv_image:
    case Scenario::tgv_image: results = run_image(cfg, p, out); break;
    case Scenario::sweep: results = run_sweep(cfg, p, out); break;
  }

  json manifest;
  std::string canonical;
  for (const auto& [k, v] : cfg.raw) {
    manifest[k] = v;
    canonical += k + "=" + v + "\n";
  }
  manifest["tau"] = p.params.tau;
  manifest["sigma"] = p.params.sigma();
  manifest["L"] = rep.L;
  manifest["regime"] = validation_json(rep);
  json inputs = {{"config", git_blob_hash(canonical)}};
  if (!cfg.input_image.empty()) inputs["input_image"] = git_blob_hash(read_file(cfg.input_image));
  manifest["input_hash"] = inputs;
  manifest["results"] = results;
  manifest["outputs"] = out.files;
  {
    auto f = out.open("manifest.json");
    f << manifest.dump(2) << "\n";
    check_written(f, "manifest.json");
  }
  return manifest;
}

}  // namespace pdl
