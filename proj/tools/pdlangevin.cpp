// Command-line runner: run / sweep / validate scenarios, print 1D oracles.
#include <CLI11.hpp>
#include <iostream>

#include "pdl/analytic.hpp"
#include "pdl/config.hpp"
#include "pdl/errors.hpp"
#include "pdl/scenario.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kRegime = 3, kIo = 4 };

pdl::ScenarioConfig load(const std::string& path, const std::vector<std::string>& extras) {
  pdl::KeyValues kv = pdl::load_key_values(path);
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string a = extras[i];
    if (a.rfind("--", 0) != 0) throw pdl::ConfigError("unexpected argument '" + a + "'");
    if (a.find('=') == std::string::npos) {
      if (i + 1 >= extras.size()) throw pdl::ConfigError("missing value for '" + a + "'");
      a += "=" + extras[++i];
    }
    pdl::apply_override(kv, a);
  }
  return pdl::parse_config(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual Langevin sampling experiments"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run the scenario described by a config file");
  run->add_option("config", config, "key = value config file")->required();
  run->allow_extras();

  auto* sweep = app.add_subcommand("sweep", "run a lambda or tau sweep on the 1D Gaussian model");
  sweep->add_option("config", config, "key = value config file")->required();
  sweep->allow_extras();

  auto* validate = app.add_subcommand("validate", "check step sizes and report regime flags");
  validate->add_option("config", config, "key = value config file")->required();
  validate->allow_extras();

  auto* oracle = app.add_subcommand("oracle", "closed-form quantities");
  auto* gauss = oracle->add_subcommand("gauss1d", "1D Gaussian model");
  oracle->require_subcommand(1);
  pdl::GaussModel1D model{1.0, 2.0, 1.5, 1.0};
  double step_c = 1e-4;
  gauss->add_option("--cf", model.c_f, "curvature parameter c_f")->capture_default_str();
  gauss->add_option("--cg", model.c_g, "curvature parameter c_g")->capture_default_str();
  gauss->add_option("--k", model.k, "scalar operator K = k")->capture_default_str();
  gauss->add_option("--lambda", model.lambda, "step ratio sigma/tau")->capture_default_str();
  gauss->add_option("--c", step_c, "step rule constant sigma*tau*k^2")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (run->parsed() || sweep->parsed()) {
      auto* sub = run->parsed() ? run : sweep;
      auto kv_extras = sub->remaining();
      if (sweep->parsed()) kv_extras.insert(kv_extras.begin(), "--scenario=sweep");
      const pdl::ScenarioConfig cfg = load(config, kv_extras);
      const auto manifest = pdl::run_scenario(cfg);
      std::cout << manifest["results"].dump(2) << "\n";
      std::cerr << "outputs written to " << cfg.output_dir << "\n";
    } else if (validate->parsed()) {
      const pdl::ScenarioConfig cfg = load(config, validate->remaining());
      std::cout << pdl::validate_scenario(cfg).dump(2) << "\n";
    } else if (gauss->parsed()) {
      std::cout << pdl::gauss1d_oracle(model, step_c).dump(2) << "\n";
    }
  } catch (const pdl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const pdl::RegimeError& e) {
    std::cerr << "regime violation: " << e.what() << "\n";
    return kRegime;
  } catch (const pdl::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const pdl::DomainError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kConfig;
  } catch (const pdl::DimensionError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
