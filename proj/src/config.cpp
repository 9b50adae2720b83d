#include "pdl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pdl/errors.hpp"

namespace pdl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string>& keys() {
  static const std::vector<std::string> k = {
      "scenario", "sampler", "tau", "lambda", "theta", "alpha", "alpha0", "alpha1", "sigma_eps", "n_chains",
      "n_steps", "burn_in", "thinning", "seed", "input_image", "output_dir", "c_f", "c_g", "k", "step_c",
      "hist_bins", "b_x", "b_y", "obs1", "obs2", "checkpoints", "ref_refinement", "ref_samples", "ref_chains",
      "ref_burn_time", "ref_spacing", "w2_points", "w2_subsamples", "width", "height", "noise_seed", "sweep_kind",
      "sweep_values", "sweep_prox_sub", "refinement", "burn_in_time", "sample_time", "record_interval", "workers"};
  return k;
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  const std::string* find(const std::string& key) {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }

  double real(const std::string& key, double def) {
    const auto* s = find(key);
    return s ? parse_real(key, *s) : def;
  }
  std::optional<double> opt_real(const std::string& key) {
    const auto* s = find(key);
    if (!s) return std::nullopt;
    return parse_real(key, *s);
  }
  std::uint64_t count(const std::string& key, std::uint64_t def) {
    const auto* s = find(key);
    if (!s) return def;
    try {
      std::size_t pos = 0;
      if (!s->empty() && (*s)[0] == '-') throw std::invalid_argument("negative");
      const auto v = std::stoull(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + *s + "'");
    }
  }
  std::string str(const std::string& key, const std::string& def) {
    const auto* s = find(key);
    return s ? *s : def;
  }
  bool flag(const std::string& key, bool def) {
    const auto* s = find(key);
    if (!s) return def;
    if (*s == "1" || *s == "true" || *s == "yes") return true;
    if (*s == "0" || *s == "false" || *s == "no") return false;
    throw ConfigError("'" + key + "' expects true/false, got '" + *s + "'");
  }
  std::vector<double> list(const std::string& key) {
    std::vector<double> out;
    const auto* s = find(key);
    if (!s) return out;
    std::string item;
    std::istringstream is(*s);
    while (std::getline(is, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_real(key, item));
    }
    return out;
  }
  Mat matrix(const std::string& key) {
    const auto* s = find(key);
    if (!s) return {};
    std::vector<std::vector<double>> rows;
    std::string row;
    std::istringstream is(*s);
    while (std::getline(is, row, ';')) {
      std::vector<double> r;
      std::string item;
      std::istringstream rs(row);
      while (std::getline(rs, item, ',')) r.push_back(parse_real(key, trim(item)));
      if (!rows.empty() && r.size() != rows.front().size()) throw ConfigError("'" + key + "': ragged matrix rows");
      rows.push_back(std::move(r));
    }
    if (rows.empty() || rows.front().empty()) throw ConfigError("'" + key + "': empty matrix");
    Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return m;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("bad");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' expects a finite number, got '" + s + "'");
    }
  }

  const KeyValues& kv_;
  std::set<std::string> used_;
};

void positive(double v, const char* key) {
  if (!(v > 0.0)) throw ConfigError(std::string("'") + key + "' must be positive");
}

}  // namespace

std::vector<std::string> known_config_keys() { return keys(); }

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, val).second)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  return parse_key_values(in, path);
}

void apply_override(KeyValues& kv, const std::string& assignment) {
  std::string s = assignment;
  while (!s.empty() && s[0] == '-') s.erase(0, 1);
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::gauss1d: return "gauss1d";
    case Scenario::tv2pixel: return "tv2pixel";
    case Scenario::tv_image: return "tv_image";
    case Scenario::tgv_image: return "tgv_image";
    case Scenario::sweep: return "sweep";
  }
  return "?";
}

ScenarioConfig parse_config(const KeyValues& kv) {
  Reader r(kv);
  ScenarioConfig c;
  const std::string sc = r.str("scenario", "gauss1d");
  bool found = false;
  for (Scenario s : {Scenario::gauss1d, Scenario::tv2pixel, Scenario::tv_image, Scenario::tgv_image, Scenario::sweep})
    if (to_string(s) == sc) {
      c.scenario = s;
      found = true;
    }
  if (!found) throw ConfigError("unknown scenario '" + sc + "'");
  c.sampler = method_from_string(r.str("sampler", "ulpda_outer"));
  c.tau = r.opt_real("tau");
  c.lambda = r.real("lambda", c.lambda);
  c.theta = r.real("theta", c.theta);
  c.alpha = r.real("alpha", c.alpha);
  c.alpha0 = r.opt_real("alpha0");
  c.alpha1 = r.opt_real("alpha1");
  c.sigma_eps = r.real("sigma_eps", c.sigma_eps);
  c.n_chains = r.count("n_chains", c.n_chains);
  c.n_steps = r.count("n_steps", c.n_steps);
  c.burn_in = r.count("burn_in", c.burn_in);
  c.thinning = r.count("thinning", c.thinning);
  c.seed = r.count("seed", c.seed);
  c.input_image = r.str("input_image", "");
  c.output_dir = r.str("output_dir", c.output_dir);
  c.c_f = r.real("c_f", c.c_f);
  c.c_g = r.real("c_g", c.c_g);
  c.k = r.real("k", c.k);
  c.step_c = r.real("step_c", c.step_c);
  c.hist_bins = static_cast<int>(r.count("hist_bins", static_cast<std::uint64_t>(c.hist_bins)));
  c.b_x = r.matrix("b_x");
  c.b_y = r.matrix("b_y");
  c.obs1 = r.real("obs1", c.obs1);
  c.obs2 = r.real("obs2", c.obs2);
  c.checkpoints = static_cast<int>(r.count("checkpoints", static_cast<std::uint64_t>(c.checkpoints)));
  c.ref_refinement = static_cast<int>(r.count("ref_refinement", static_cast<std::uint64_t>(c.ref_refinement)));
  c.ref_samples = r.count("ref_samples", c.ref_samples);
  c.ref_chains = r.count("ref_chains", c.ref_chains);
  c.ref_burn_time = r.real("ref_burn_time", c.ref_burn_time);
  c.ref_spacing = r.real("ref_spacing", c.ref_spacing);
  c.w2_points = static_cast<Index>(r.count("w2_points", static_cast<std::uint64_t>(c.w2_points)));
  c.w2_subsamples = static_cast<int>(r.count("w2_subsamples", static_cast<std::uint64_t>(c.w2_subsamples)));
  c.width = static_cast<Index>(r.count("width", static_cast<std::uint64_t>(c.width)));
  c.height = static_cast<Index>(r.count("height", static_cast<std::uint64_t>(c.height)));
  c.noise_seed = r.count("noise_seed", c.noise_seed);
  c.sweep_kind = r.str("sweep_kind", c.sweep_kind);
  c.sweep_values = r.list("sweep_values");
  c.sweep_prox_sub = r.flag("sweep_prox_sub", c.sweep_prox_sub);
  c.refinement = static_cast<int>(r.count("refinement", static_cast<std::uint64_t>(c.refinement)));
  c.burn_in_time = r.real("burn_in_time", c.burn_in_time);
  c.sample_time = r.real("sample_time", c.sample_time);
  c.record_interval = r.real("record_interval", c.record_interval);
  c.workers = static_cast<unsigned>(r.count("workers", c.workers));
  r.reject_unknown();

  if (c.tau) positive(*c.tau, "tau");
  positive(c.lambda, "lambda");
  if (!(c.theta >= 0.0 && c.theta <= 1.0)) throw ConfigError("'theta' must lie in [0, 1]");
  positive(c.alpha, "alpha");
  if (c.alpha0) positive(*c.alpha0, "alpha0");
  if (c.alpha1) positive(*c.alpha1, "alpha1");
  positive(c.sigma_eps, "sigma_eps");
  if (c.n_chains < 1) throw ConfigError("'n_chains' must be >= 1");
  if (c.thinning < 1) throw ConfigError("'thinning' must be >= 1");
  positive(c.c_f, "c_f");
  positive(c.c_g, "c_g");
  if (c.k == 0.0) throw ConfigError("'k' must be nonzero");
  positive(c.step_c, "step_c");
  if (c.hist_bins < 1) throw ConfigError("'hist_bins' must be >= 1");
  if (c.checkpoints < 1) throw ConfigError("'checkpoints' must be >= 1");
  if (c.ref_refinement < 1) throw ConfigError("'ref_refinement' must be >= 1");
  if (c.ref_chains < 1 || c.ref_samples < c.ref_chains) throw ConfigError("'ref_samples' must be >= 'ref_chains' >= 1");
  positive(c.ref_burn_time, "ref_burn_time");
  positive(c.ref_spacing, "ref_spacing");
  if (c.w2_points < 1 || c.w2_subsamples < 1) throw ConfigError("'w2_points' and 'w2_subsamples' must be >= 1");
  if (c.width < 1 || c.height < 1) throw ConfigError("'width' and 'height' must be >= 1");
  if (c.sweep_kind != "lambda" && c.sweep_kind != "tau") throw ConfigError("'sweep_kind' must be lambda or tau");
  if (c.refinement == 1) throw ConfigError("'refinement' must be 0 (off) or >= 2");
  positive(c.burn_in_time, "burn_in_time");
  positive(c.sample_time, "sample_time");
  positive(c.record_interval, "record_interval");
  if (c.scenario == Scenario::tv2pixel || c.scenario == Scenario::tv_image || c.scenario == Scenario::tgv_image)
    if (!c.tau) throw ConfigError("scenario '" + to_string(c.scenario) + "' requires 'tau'");
  if (c.scenario == Scenario::sweep && c.sweep_values.empty()) throw ConfigError("sweep requires 'sweep_values'");
  if (c.sampler == Method::ulpda_general && (c.b_x.size() == 0 || c.b_y.size() == 0))
    throw ConfigError("ulpda_general requires 'b_x' and 'b_y'");

  // Resolved view: every known key with its effective value.
  std::ostringstream os;
  os.precision(17);
  auto put = [&](const std::string& k, const auto& v) {
    os.str("");
    os << v;
    c.raw[k] = os.str();
  };
  for (const auto& [k, v] : kv) c.raw[k] = v;
  put("scenario", to_string(c.scenario));
  put("sampler", to_string(c.sampler));
  put("lambda", c.lambda);
  put("theta", c.theta);
  put("alpha", c.alpha);
  put("sigma_eps", c.sigma_eps);
  put("n_chains", c.n_chains);
  put("n_steps", c.n_steps);
  put("burn_in", c.burn_in);
  put("thinning", c.thinning);
  put("seed", c.seed);
  put("output_dir", c.output_dir);
  return c;
}

}  // namespace pdl
