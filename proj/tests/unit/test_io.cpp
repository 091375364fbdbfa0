#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "twowave/cli.hpp"
#include "twowave/io.hpp"

using namespace twowave;
namespace fs = std::filesystem;

namespace {

fs::path configs_dir() {
  const char* d = std::getenv("TWOWAVE_CONFIGS");
  return d ? fs::path(d) : fs::path("configs");
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("twowave_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_text(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped configs parse") {
  CHECK(parse_config(configs_dir() / "default.json") == default_config());
  CHECK(parse_config(configs_dir() / "mismatched.json") == default_config(2.0));
}

TEST_CASE("json round trip") {
  SystemConfig c = default_config(2.0);
  c.c1 = 0.1 + 0.2;
  c.beta = {1.05, 1.2, 1.3, 1.45};
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json(nlohmann::json::parse(config_to_json(c).dump())) == c);
}

TEST_CASE("parse errors name the offending key") {
  nlohmann::json j = config_to_json(default_config());
  j["a2"] = "fast";
  CHECK(code_of([&] { config_from_json(j); }) == ErrorCode::ParseError);
  CHECK(error_text([&] { config_from_json(j); }).find("a2") != std::string::npos);

  j = config_to_json(default_config());
  j["alpha"] = {0.1, 0.2, 0.3};
  CHECK(code_of([&] { config_from_json(j); }) == ErrorCode::ParseError);
  CHECK(error_text([&] { config_from_json(j); }).find("alpha") != std::string::npos);

  j = config_to_json(default_config());
  j.erase("beta");
  CHECK(code_of([&] { config_from_json(j); }) == ErrorCode::MissingKey);
  CHECK(error_text([&] { config_from_json(j); }).find("beta") != std::string::npos);

  j.erase("c2");
  j.erase("L0");
  const std::string msg = error_text([&] { config_from_json(j); });
  for (const char* k : {"beta", "c2", "L0"}) CHECK(msg.find(k) != std::string::npos);

  j = config_to_json(default_config());
  j["gamma"] = 1.0;
  CHECK(code_of([&] { config_from_json(j); }) == ErrorCode::UnknownKey);
  CHECK(error_text([&] { config_from_json(j); }).find("gamma") != std::string::npos);

  CHECK(code_of([] { config_from_json(nlohmann::json::array()); }) == ErrorCode::ParseError);

  const fs::path dir = scratch_dir("parse");
  CHECK(code_of([&] { parse_config(write_text(dir, "bad.json", "{\"L0\": 1.0,")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { parse_config(dir / "absent.json"); }) == ErrorCode::ParseError);
}

TEST_CASE("overrides") {
  SystemConfig c = default_config();
  apply_override(c, "a2=2");
  apply_override(c, "c1=-0.25");
  apply_override(c, "beta=1.0,1.2,1.3,1.5");
  CHECK(c.a2 == 2.0);
  CHECK(c.c1 == -0.25);
  CHECK(c.beta == std::array<double, 4>{1.0, 1.2, 1.3, 1.5});
  CHECK(code_of([&] { apply_override(c, "zeta=1"); }) == ErrorCode::UnknownKey);
  CHECK(code_of([&] { apply_override(c, "a2=fast"); }) == ErrorCode::ParseError);
  CHECK(error_text([&] { apply_override(c, "a2=fast"); }).find("a2") != std::string::npos);
  CHECK(code_of([&] { apply_override(c, "alpha=1,2"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { apply_override(c, "a2"); }) == ErrorCode::ParseError);
  CHECK(c.a2 == 2.0);
}

TEST_CASE("format_double reads back exactly") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv files carry the config header and are deterministic") {
  const SystemConfig raw = default_config();
  EnergyTrace t;
  t.times = {0.0, 1.0};
  t.energies = {2.0, 1.5};
  t.balance_residuals = {0.0, 1e-15};
  t.initial_graph_norm = 3.0;
  t.config_tag = "a2=1";
  std::ostringstream a, b;
  write_trace_csv(a, t, raw);
  write_trace_csv(b, t, raw);
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# config: ", 0) == 0);
  CHECK(config_from_json(nlohmann::json::parse(line.substr(10))) == raw);
  std::vector<std::string> body;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    body.push_back(line);
  }
  REQUIRE(body.size() == 3);
  CHECK(body[0] == "t,E,balance_residual");
  CHECK(body[2] == "1,1.5,1e-15");
}

TEST_CASE("run_command exit codes") {
  const fs::path dir = scratch_dir("run");
  std::ostringstream out, err;

  Command v;
  v.verb = "validate";
  v.output_dir = dir;
  CHECK(run_command(v, out, err) == kExitOk);
  CHECK(out.str().find("C0: ") != std::string::npos);

  Command bad = v;
  bad.overrides = {"c1=20"};
  CHECK(run_command(bad, out, err) == kExitUsage);
  CHECK(err.str().find("CoercivityViolation") != std::string::npos);

  Command unknown = v;
  unknown.verb = "dance";
  CHECK(run_command(unknown, out, err) == kExitUsage);

  Command r = v;
  r.verb = "resolvent";
  r.h = 0.05;
  r.lambda_min = 20.0;
  r.lambda_max = 40.0;  // cutoff at h = 0.05 is about 12.6
  err.str("");
  CHECK(run_command(r, out, err) == kExitUsage);
  CHECK(err.str().find("BandTooNarrow") != std::string::npos);

  Command s = v;
  s.verb = "spectrum";
  s.h = 0.05;
  s.overrides = {"d2=0", "c2=0"};  // conservative: spectrum on the imaginary axis
  CHECK(run_command(s, out, err) == kExitFinding);
  CHECK(fs::exists(dir / "eigenvalues.csv"));

  s.overrides.clear();
  CHECK(run_command(s, out, err) == kExitOk);

  Command sim = v;
  sim.verb = "decay";
  sim.h = 0.05;
  sim.T = 20.0;
  CHECK(run_command(sim, out, err) == kExitOk);
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "decay.json"));
}

TEST_CASE("command line binary") {
  const char* cli = std::getenv("TWOWAVE_CLI");
  if (!cli) {
    MESSAGE("TWOWAVE_CLI not set, skipping");
    return;
  }
  const fs::path dir = scratch_dir("bin");
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  const std::string out = "--out " + dir.string();
  CHECK(run("validate " + out) == 0);
  CHECK(run("validate --config " + (configs_dir() / "mismatched.json").string() + " " + out) == 0);
  CHECK(run("validate --set c1=20 " + out) == 2);
  CHECK(run("validate --config " + (dir / "missing.json").string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("resolvent --h 0.05 --lambda-min 20 --lambda-max 40 " + out) == 2);
  CHECK(run("spectrum --h 0.05 --set d2=0 --set c2=0 " + out) == 1);
  CHECK(run("static-solve --h 0.04 " + out) == 0);
  CHECK(fs::exists(dir / "static.csv"));
}
