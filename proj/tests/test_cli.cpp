#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mlpo/cli.hpp"
#include "mlpo/util.hpp"

using namespace mlpo;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("mlpo");
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream captured_out, captured_err;
  std::streambuf* old_out = std::cout.rdbuf(captured_out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(captured_err.rdbuf());
  CliResult result;
  result.code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  result.out = captured_out.str();
  result.err = captured_err.str();
  return result;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

struct TempFile {
  std::string path;
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("critical order of the all-two profile prints exactly") {
  TempFile f{"cli_profile_all2.json"};
  write_file(f.path, R"({"N": 2, "n": 1, "p": "2", "p_j": ["2", "2"]})");
  CliResult r = run_cli({"exponents", "critical", "--config", f.path});
  CHECK(r.code == 0);
  CHECK(r.out == "-0.5\n");
  CliResult check = run_cli({"exponents", "check", "--config", f.path});
  CHECK(check.code == 0);
  CHECK(check.out.find("sufficient") != std::string::npos);
}

TEST_CASE("sequence norms evaluate from the command line") {
  CliResult r = run_cli({"norm", "--space", "lq", "--q", "1", "--seq", "3,4"});
  CHECK(r.code == 0);
  CHECK(r.out == "7\n");
  CliResult rinf = run_cli({"norm", "--space", "lq", "--q", "inf", "--seq", "3,4"});
  CHECK(rinf.code == 0);
  CHECK(rinf.out == "4\n");
}

TEST_CASE("validation failures exit 1 and name the offender") {
  CliResult missing = run_cli({"exponents", "critical"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("--config") != std::string::npos);

  CliResult no_seq = run_cli({"norm", "--space", "lq", "--q", "1"});
  CHECK(no_seq.code == 1);
  CHECK(no_seq.err.find("--seq") != std::string::npos);

  CliResult bad_space = run_cli({"norm", "--space", "banana", "--seq", "1"});
  CHECK(bad_space.code == 1);

  TempFile f{"cli_profile_broken.json"};
  write_file(f.path, "this is not json");
  CliResult broken = run_cli({"exponents", "critical", "--config", f.path});
  CHECK(broken.code == 1);

  CliResult absent = run_cli({"exponents", "critical", "--config", "no_such_file.json"});
  CHECK(absent.code == 1);
  CHECK(absent.err.find("no_such_file.json") != std::string::npos);

  TempFile g{"cli_profile_extra.json"};
  write_file(g.path, R"({"N": 2, "n": 1, "p": "2", "p_j": ["2", "2"], "trialz": 1})");
  CliResult extra = run_cli({"exponents", "critical", "--config", g.path});
  CHECK(extra.code == 1);
  CHECK(extra.err.find("trialz") != std::string::npos);
}

TEST_CASE("help requests exit 0") {
  CliResult top = run_cli({"--help"});
  CHECK(top.code == 0);
  CHECK(top.out.find("experiment") != std::string::npos);
  CliResult sub = run_cli({"norm", "--help"});
  CHECK(sub.code == 0);
  CHECK(sub.out.find("--seq") != std::string::npos);
}

TEST_CASE("window partitions verify from the command line") {
  CliResult r = run_cli({"windows", "verify", "--kind", "sharp", "--levels", "4",
                         "--points", "1024", "--scale", "4"});
  CHECK(r.code == 0);
  CHECK(!r.out.empty());
}

TEST_CASE("tuple sets enumerate with the frozen count") {
  CliResult r = run_cli({"extremal", "enumerate", "--kind", "sum-zero", "--ell", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("count = 46") != std::string::npos);
}

TEST_CASE("experiment dry runs validate without writing") {
  CliResult r = run_cli({"experiment", "sharpness-s", "--dry-run"});
  CHECK(r.code == 0);
  CHECK(r.out.find("dry-run: configuration valid") != std::string::npos);
  // Unknown keys in a config file are rejected by name.
  TempFile f{"cli_experiment_extra.json"};
  write_file(f.path, R"({"trialz": 3})");
  CliResult extra = run_cli({"experiment", "sharpness-s", "--config", f.path, "--dry-run"});
  CHECK(extra.code == 1);
  CHECK(extra.err.find("trialz") != std::string::npos);
  // A real run refuses to start without an output path.
  CliResult no_out = run_cli({"experiment", "sharpness-s"});
  CHECK(no_out.code == 1);
  CHECK(no_out.err.find("--out") != std::string::npos);
}

TEST_CASE("report paths derive sidecar and per-report names") {
  CHECK(sidecar_path("out/rep.csv") == "out/rep.json");
  CHECK(sidecar_path("rep") == "rep.json");
  CHECK(sidecar_path("rep.json") == "rep.meta.json");
  CHECK(multi_report_path("a/b.csv", "x") == "a/b.x.csv");
  CHECK(multi_report_path("b", "x") == "b.x.csv");
}

TEST_CASE("experiment configs parse defaults and reject unknown keys") {
  SharpnessSConfig s = sharpness_s_config_from_json(R"({"ell_lo": 4})");
  CHECK(s.ell_lo == 4);
  CHECK(s.ell_hi == 12);
  CHECK(s.seed == 20260819);
  CHECK_THROWS_AS(sharpness_s_config_from_json(R"({"trialz": 1})"), config_error);

  SharpnessSjConfig sj = sharpness_sj_config_from_json(R"({"khintchine": true})");
  CHECK(sj.khintchine);
  CHECK_THROWS_AS(sharpness_sj_config_from_json(R"({"x": 1})"), config_error);

  KeypropConfig kp = keyprop_config_from_json(R"({"R_values": [4, 8, 16]})");
  CHECK(kp.R_values == std::vector<int>{4, 8, 16});
  CHECK_THROWS_AS(keyprop_config_from_json(R"({"R": 1})"), config_error);

  BandDecayConfig bd = band_decay_config_from_json(R"({"level_hi": 5})");
  CHECK(bd.level_hi == 5);
  CHECK_THROWS_AS(band_decay_config_from_json(R"({"hi": 5})"), config_error);

  EmbeddingConfig em = embedding_config_from_json(R"({"band_hi": 6})");
  CHECK(em.band_hi == 6);
  CHECK_THROWS_AS(embedding_config_from_json(R"({"bands": 6})"), config_error);

  WaingerContrastConfig wc = wainger_contrast_config_from_json(R"({"a": 0.5})");
  CHECK(wc.a == 0.5);
  CHECK_THROWS_AS(wainger_contrast_config_from_json(R"({"alpha": 0.5})"), config_error);
}

TEST_CASE("symbols parse from JSON descriptions") {
  Symbol sym = symbol_from_json(
      R"({"kind": "constant", "n": 1, "N": 2, "constant_re": 2.0, "constant_im": -1.0})");
  double x = 0.0, Xi[2] = {3.0, -4.0};
  CHECK(sym.eval(&x, Xi) == cd{2.0, -1.0});
  CHECK_THROWS_AS(symbol_from_json(R"({"kind": "banana"})"), config_error);
  CHECK_THROWS_AS(symbol_from_json(R"({"kind": "constant", "frequency": 3})"),
                  config_error);
  Symbol lattice = symbol_from_json(
      R"({"kind": "lattice", "set": {"kind": "sum-zero", "ell": 4}, "m": -0.5})");
  CHECK(lattice.structure == Symbol::Structure::lattice_sum);
  REQUIRE(lattice.lattice);
  CHECK(lattice.lattice->m == -0.5);
}

}  // TEST_SUITE
