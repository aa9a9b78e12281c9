#include "widthlab/config.hpp"
#include "widthlab/experiments.hpp"
#include "widthlab/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace widthlab;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"([experiment]
kind = fixed-b
[geometry]
d = 2
[scales]
h = 0.1
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("widthlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int code;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / "widthlab_cli_log.txt";
  const std::string cmd = env + " " + WIDTHLAB_CLI + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(log)};
}

std::string config_error_key(const std::string& text) {
  try {
    validate(parse_config(text));
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped configs round trip") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(WIDTHLAB_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".ini") continue;
    ++seen;
    CAPTURE(entry.path().string());
    const ExperimentConfig c = load_config(entry.path().string());
    CHECK_NOTHROW(validate(c));
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK(c == default_config(c.kind));
    CHECK(entry.path().stem().string() == to_string(c.kind));
  }
  CHECK(seen == 8);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.kind == ExperimentKind::fixed_b);
  CHECK(c.d == 2);
  CHECK(c.h == std::vector<double>{0.1});
  CHECK(c.s_minus == 1);
  CHECK(c.p == 2.0);

  const ExperimentConfig frac = parse_config(kMinimal + "[smoothness]\np = inf\n" + "");
  CHECK(std::isinf(frac.p));
  std::string text = kMinimal;
  text.replace(text.find("h = 0.1"), 7, "h = 1/20, 1/40");
  const ExperimentConfig f = parse_config(text);
  CHECK(f.h == std::vector<double>{0.05, 0.025});
}

TEST_CASE("config errors name the offending key") {
  std::string no_d = kMinimal;
  no_d.erase(no_d.find("d = 2"), 5);
  CHECK(config_error_key(no_d) == "geometry.d");

  std::string big_h = kMinimal;
  big_h.replace(big_h.find("h = 0.1"), 7, "h = 0.2");
  CHECK(config_error_key(big_h) == "scales.h");

  CHECK(config_error_key(kMinimal + "[smoothness]\ns_minus = 1.5\n") == "smoothness.s_minus");
  CHECK(config_error_key(kMinimal + "[smoothness]\nflavour = 3\n") == "smoothness.flavour");
  CHECK(config_error_key(kMinimal + "[riemann]\nmu = 0\n") == "riemann.mu");
  std::string zero_big_d = kMinimal;
  zero_big_d.replace(zero_big_d.find("d = 2"), 5, "d = 2\nD = 0");
  CHECK(config_error_key(zero_big_d) == "geometry.D");
  // a repeated section is a syntax error
  CHECK_THROWS_AS(parse_config(kMinimal + "[geometry]\nD = 2\n"), ConfigError);

  std::string bad_kind = kMinimal;
  bad_kind.replace(bad_kind.find("fixed-b"), 7, "fixed-c");
  CHECK(config_error_key(bad_kind) == "experiment.kind");
}

TEST_CASE("csv output") {
  const fs::path dir = scratch("csv");
  CsvTable t{{"h", "n", "epsilon", "n_ent"}, {}};
  CHECK(format_csv(t) == "h,n,epsilon,n_ent\n");
  t.rows.push_back({0.1, 3, 1.0 / 3.0, 2});
  const std::string text = format_csv(t);
  CHECK(text == "h,n,epsilon,n_ent\n0.10000000000000001,3,0.33333333333333331,2\n");
  CHECK(text.find('\r') == std::string::npos);
  emit_csv(t, (dir / "t.csv").string());
  CHECK(slurp(dir / "t.csv") == text);

  CsvTable bad{{"a", "b"}, {{1.0}}};
  CHECK_THROWS_AS(format_csv(bad), DomainError);
  CHECK_THROWS_AS(emit_csv(t, (dir / "missing" / "sub" / "t.csv").string()), IoError);
}

TEST_CASE("report text") {
  RunReport r;
  r.kind = ExperimentKind::fixed_b;
  r.fitted_exponent = 2.9;
  r.theory_exponent = 3.0;
  r.certificates.push_back({0.1, 3, 4.7e-4, 2});
  r.check("exponent", true, "2.9 vs 3");
  r.wall_time = 123.0;
  const std::string text = format_report(r);
  CHECK(text.find("implied (strict inequality, log factors omitted)") != std::string::npos);
  CHECK(text.find("123") == std::string::npos);
  CHECK(r.passed());
  r.check("other", false, "nope");
  CHECK_FALSE(r.passed());
}

TEST_CASE("command line") {
  const std::string cfg = std::string(WIDTHLAB_SOURCE_DIR) + "/configs/";

  SUBCASE("riemann runs and writes its table") {
    const fs::path out = scratch("riemann");
    const CliResult r = run_cli("riemann --config " + cfg + "riemann.ini --out " + out.string());
    CHECK(r.code == 0);
    std::istringstream csv(slurp(out / "riemann.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "mu,recovered,error");
    int rows = 0;
    while (std::getline(csv, line)) {
      double mu, rec, err;
      char c1, c2;
      std::istringstream(line) >> mu >> c1 >> rec >> c2 >> err;
      CHECK(std::abs(rec - mu) <= 1e-10);
      ++rows;
    }
    CHECK(rows == 5);
    CHECK(fs::exists(out / "report.txt"));
  }

  SUBCASE("missing key exits 1 and names it") {
    const fs::path dir = scratch("missing_d");
    std::string no_d = kMinimal;
    no_d.erase(no_d.find("d = 2"), 5);
    std::ofstream(dir / "c.ini") << no_d;
    const CliResult r = run_cli("fixed-b --config " + (dir / "c.ini").string() + " --out " + dir.string());
    CHECK(r.code == 1);
    CHECK(r.out.find("geometry.d") != std::string::npos);
  }

  SUBCASE("subcommand must match the configured kind") {
    const CliResult r = run_cli("fixed-b --config " + cfg + "riemann.ini --out " + scratch("mismatch").string());
    CHECK(r.code == 1);
  }

  SUBCASE("unwritable output directory exits 1") {
    const fs::path dir = scratch("blocked");
    std::ofstream(dir / "file") << "x";
    const CliResult r = run_cli("riemann --config " + cfg + "riemann.ini --out " + (dir / "file" / "sub").string());
    CHECK(r.code == 1);
  }

  SUBCASE("fixed-b passes and is deterministic across thread counts") {
    const fs::path a = scratch("fixed_a"), b = scratch("fixed_b"), c = scratch("fixed_c");
    CHECK(run_cli("fixed-b --config " + cfg + "fixed-b.ini --out " + a.string(), "WIDTHLAB_THREADS=1").code == 0);
    CHECK(run_cli("fixed-b --config " + cfg + "fixed-b.ini --out " + b.string(), "WIDTHLAB_THREADS=1").code == 0);
    CHECK(run_cli("fixed-b --config " + cfg + "fixed-b.ini --out " + c.string(), "WIDTHLAB_THREADS=3").code == 0);
    const std::string csv = slurp(a / "fixed-b.csv");
    CHECK(csv.rfind("h,n,epsilon,n_ent\n", 0) == 0);
    CHECK(csv == slurp(b / "fixed-b.csv"));
    CHECK(csv == slurp(c / "fixed-b.csv"));
    CHECK(slurp(a / "report.txt") == slurp(c / "report.txt"));
  }

  SUBCASE("bad invocation exits 1") {
    CHECK(run_cli("no-such-experiment").code == 1);
    CHECK(run_cli("riemann").code == 1);
  }
}
