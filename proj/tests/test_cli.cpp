#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdl/analytic.hpp"
#include "pdl/config.hpp"
#include "pdl/errors.hpp"
#include "pdl/image.hpp"
#include "pdl/metrics.hpp"
#include "pdl/scenario.hpp"

using namespace pdl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path("cli_scratch") / name;
  fs::create_directories(p.parent_path());
  return p;
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream o(p, std::ios::binary);
  o << bytes;
}

std::string read_file(const fs::path& p) {
  std::ifstream i(p, std::ios::binary);
  std::ostringstream s;
  s << i.rdbuf();
  return s.str();
}

KeyValues parse(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in, "test");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PDL_CLI_PATH) + " " + args + " > cli_scratch/last.out 2> cli_scratch/last.err";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("PGM loading") {
  const fs::path p2 = scratch("a.pgm");
  write_file(p2, "P2\n# comment\n2 2\n255\n255 255\n255 255\n");
  const ImageGrid a = load_image_pgm(p2.string());
  CHECK(a.width == 2);
  CHECK(a.height == 2);
  for (double v : a.data) CHECK(v == 1.0);

  write_file(p2, "P2\n3 1\n4\n0 1 4\n");
  const ImageGrid b = load_image_pgm(p2.string());
  CHECK(b.data[1] == 0.25);

  const fs::path bad = scratch("bad.pgm");
  write_file(bad, "P6\n1 1\n255\n\x01\x02\x03");
  try {
    load_image_pgm(bad.string());
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("P6") != std::string::npos);
  }
  write_file(bad, "P5\n4 4\n255\nabc");
  CHECK_THROWS_AS(load_image_pgm(bad.string()), IoError);
  write_file(bad, "P2\n2 1\n255\n3\n");
  CHECK_THROWS_AS(load_image_pgm(bad.string()), IoError);
  write_file(bad, "P2\n2 1\n70000\n3 4\n");
  CHECK_THROWS_AS(load_image_pgm(bad.string()), IoError);
  write_file(bad, "P2\n2 1\n255\n3 400\n");
  CHECK_THROWS_AS(load_image_pgm(bad.string()), IoError);
  CHECK_THROWS_AS(load_image_pgm("cli_scratch/does_not_exist.pgm"), IoError);
}

TEST_CASE("PGM roundtrip") {
  const ImageGrid ph = make_phantom(17, 9);
  const fs::path p = scratch("rt.pgm");
  save_image_pgm(ph, p.string(), 255);
  const ImageGrid back = load_image_pgm(p.string());
  REQUIRE(back.width == 17);
  REQUIRE(back.height == 9);
  for (Index i = 0; i < ph.size(); ++i) REQUIRE(std::abs(back.data[i] - ph.data[i]) <= 1.0 / 510.0 + 1e-15);
  save_image_pgm(ph, p.string());
  const ImageGrid deep = load_image_pgm(p.string());
  for (Index i = 0; i < ph.size(); ++i) REQUIRE(std::abs(deep.data[i] - ph.data[i]) <= 1.0 / 131070.0 + 1e-15);
  // clamping
  ImageGrid wild = ImageGrid::from_vector(2, 1, (Vec(2) << -0.5, 1.7).finished());
  save_image_pgm(wild, p.string(), 255);
  const ImageGrid c = load_image_pgm(p.string());
  CHECK(c.data[0] == 0.0);
  CHECK(c.data[1] == 1.0);
}

TEST_CASE("add_gaussian_noise") {
  const ImageGrid clean = make_phantom(64, 64);
  CHECK(add_gaussian_noise(clean, 0.0, 3).data == clean.data);
  const ImageGrid noisy = add_gaussian_noise(clean, 0.25, 3);
  CHECK(add_gaussian_noise(clean, 0.25, 3).data == noisy.data);
  CHECK(std::abs(psnr(clean, noisy) - (-20.0 * std::log10(0.25))) < 0.2);
  const double sd = std::sqrt((noisy.vec() - clean.vec()).squaredNorm() / 4096.0);
  CHECK(std::abs(sd - 0.25) < 3.0 * 0.25 / 64.0);
  // no clipping
  CHECK((noisy.vec().array() < 0.0).any());
}

TEST_CASE("gauss1d_stepsizes") {
  const StepSizes s = gauss1d_stepsizes(1.0, 1.5, 1e-4);
  CHECK(s.tau == doctest::Approx(1e-2 / 1.5).epsilon(1e-14));
  CHECK(s.sigma == doctest::Approx(1e-2 / 1.5).epsilon(1e-14));
  for (double lam : {0.3, 10.0, 1000.0}) {
    const StepSizes r = gauss1d_stepsizes(lam, -2.0, 0.5);
    CHECK(r.sigma / r.tau == doctest::Approx(lam).epsilon(1e-14));
    CHECK(r.sigma * r.tau * 4.0 == doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gauss1d_stepsizes(1.0, 1.5, 1.5), DomainError);
  CHECK_THROWS_AS(gauss1d_stepsizes(-1.0, 1.5, 0.5), DomainError);
  CHECK_THROWS_AS(gauss1d_stepsizes(1.0, 0.0, 0.5), DomainError);
}

TEST_CASE("git_blob_hash") {
  // `git hash-object` of an empty file and of "hello\n"
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("config parsing") {
  const KeyValues kv = parse("# header\nscenario = gauss1d\n lambda=10  # trailing\n\nseed = 3\n");
  CHECK(kv.at("lambda") == "10");
  CHECK(kv.at("seed") == "3");
  const ScenarioConfig c = parse_config(kv);
  CHECK(c.scenario == Scenario::gauss1d);
  CHECK(c.lambda == 10.0);
  CHECK(c.seed == 3);
  CHECK_FALSE(c.tau.has_value());
  CHECK(c.alpha == 10.0);

  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(parse("lamda = 1\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(parse("lambda = -1\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(parse("lambda = abc\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(parse("n_chains = -3\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(parse("scenario = mandelbrot\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(parse("scenario = tv_image\n")), ConfigError);  // tau required
  CHECK_THROWS_AS(load_key_values("cli_scratch/missing.cfg"), IoError);

  KeyValues o = kv;
  apply_override(o, "--lambda=100");
  apply_override(o, "theta=0.5");
  CHECK(o.at("lambda") == "100");
  CHECK(parse_config(o).theta == 0.5);
  CHECK_THROWS_AS(apply_override(o, "--lambda"), ConfigError);
}

TEST_CASE("generalized noise matrices from config") {
  const ScenarioConfig c =
      parse_config(parse("sampler = ulpda_general\nb_x = 1.4142135623730951, 0\nb_y = 0, 0.5\n"));
  REQUIRE(c.b_x.rows() == 1);
  REQUIRE(c.b_x.cols() == 2);
  CHECK(c.b_y(0, 1) == 0.5);
  CHECK_THROWS_AS(parse_config(parse("b_x = 1, 2; 3\n")), ConfigError);
}

TEST_CASE("gauss1d scenario run") {
  KeyValues kv = parse(
      "scenario = gauss1d\nlambda = 100\nn_chains = 2000\nn_steps = 45000\nburn_in = 15000\nthinning = 1000\n"
      "seed = 11\noutput_dir = cli_scratch/g1\n");
  const ScenarioConfig c = parse_config(kv);
  const nlohmann::json m = run_scenario(c);
  const double expect = 411.0 / 1105.5;
  const double var = m["results"]["var_x"].get<double>();
  CHECK(std::abs(var / expect - 1.0) < 0.03);
  CHECK(m["results"]["oracle_var_x"].get<double>() == doctest::Approx(expect));
  CHECK(m["lambda"] == "100");
  CHECK(m.contains("regime"));
  CHECK(m["input_hash"].contains("config"));
  CHECK(fs::exists("cli_scratch/g1/summary.csv"));
  CHECK(fs::exists("cli_scratch/g1/histogram.csv"));
  CHECK(fs::exists("cli_scratch/g1/manifest.json"));
  // bit-identical rerun
  const std::string first = read_file("cli_scratch/g1/summary.csv");
  run_scenario(c);
  CHECK(read_file("cli_scratch/g1/summary.csv") == first);
}

TEST_CASE("tv_image scenario on a tiny phantom") {
  const ScenarioConfig c = parse_config(parse(
      "scenario = tv_image\nwidth = 12\nheight = 12\ntau = 0.01\nlambda = 10\nn_chains = 4\nn_steps = 400\n"
      "burn_in = 200\nthinning = 20\nalpha = 5\noutput_dir = cli_scratch/img\n"));
  const nlohmann::json m = run_scenario(c);
  for (const char* f : {"clean.pgm", "noisy.pgm", "mmse.pgm", "log10_variance.pgm", "dual_dispersion.pgm",
                        "summary.csv", "manifest.json"})
    CHECK(fs::exists(fs::path("cli_scratch/img") / f));
  CHECK(m["results"]["psnr_mmse"].get<double>() > m["results"]["psnr_noisy"].get<double>());
  const ImageGrid mm = load_image_pgm("cli_scratch/img/mmse.pgm");
  CHECK(mm.width == 12);
}

TEST_CASE("validate_scenario") {
  const nlohmann::json v = validate_scenario(parse_config(parse("scenario = tv2pixel\ntau = 0.01\nlambda = 10\n")));
  CHECK(v["stability_regime"].get<bool>());
  CHECK(v["L"].get<double>() == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(validate_scenario(parse_config(parse("scenario = tv2pixel\ntau = 1\nlambda = 10\n"))), RegimeError);
}

TEST_CASE("command-line exit codes") {
  write_file(scratch("ok.cfg"), "scenario = tv2pixel\ntau = 0.01\nlambda = 10\n");
  write_file(scratch("bad.cfg"), "scenario = tv2pixel\nlamda = 10\n");
  write_file(scratch("regime.cfg"), "scenario = tv2pixel\ntau = 1\nlambda = 10\n");
  CHECK(run_cli("validate cli_scratch/ok.cfg") == 0);
  CHECK(read_file("cli_scratch/last.out").find("stability_regime") != std::string::npos);
  CHECK(run_cli("validate cli_scratch/bad.cfg") == 2);
  CHECK(run_cli("validate cli_scratch/regime.cfg") == 3);
  CHECK(run_cli("validate cli_scratch/ok.cfg --tau=1") == 3);
  CHECK(run_cli("validate cli_scratch/ok.cfg --tau 0.001") == 0);
  CHECK(run_cli("validate cli_scratch/nope.cfg") == 4);
  CHECK(run_cli("oracle gauss1d --lambda 1") == 0);
  const nlohmann::json o = nlohmann::json::parse(read_file("cli_scratch/last.out"));
  CHECK(o["stationary_cov"][0][0].get<double>() == doctest::Approx(15.0 / 16.5));
  CHECK(run_cli("oracle gauss1d --lambda -1") == 2);
  CHECK(run_cli("frobnicate") == 2);
  write_file(scratch("img.cfg"),
             "scenario = tv_image\ntau = 0.01\ninput_image = cli_scratch/none.pgm\noutput_dir = cli_scratch/x\n");
  CHECK(run_cli("run cli_scratch/img.cfg") == 4);
}
