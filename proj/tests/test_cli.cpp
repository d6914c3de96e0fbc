#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kBin = MVIS_BIN_PATH;

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string dir = (fs::temp_directory_path() / "mvis_cli_out").string();
  const std::string cmd = kBin + " " + args + " >" + dir + ".stdout 2>" + dir + ".stderr";
  const int rc = std::system(cmd.c_str());
  std::ifstream f(dir + ".stdout");
  std::stringstream ss;
  ss << f.rdbuf();
  std::ifstream e(dir + ".stderr");
  ss << e.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("analyze produces the full product set and is byte-stable") {
  const fs::path out = fresh_dir("mvis_cli_analyze");
  const std::string args = "analyze --scenario cat --size 6 --W 0,1 --p-sizes 6,8,10 --out " +
                           out.string();
  RunResult r = run(args);
  REQUIRE(r.exit_code == 0);
  for (const char* f : {"cat6_kernel.csv", "cat6_field_W1.csv", "cat6_field_W1.json",
                        "cat6_heat_W1.svg", "cat6_stem_W0.svg", "cat6_summary.json",
                        "cat6_vcm.json"})
    CHECK(fs::exists(out / f));

  const std::string kernel1 = slurp(out / "cat6_kernel.csv");
  const std::string field1 = slurp(out / "cat6_field_W1.csv");

  // re-run: byte-identical CSVs (state served from the cache this time)
  RunResult r2 = run(args);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(out / "cat6_kernel.csv") == kernel1);
  CHECK(slurp(out / "cat6_field_W1.csv") == field1);
  const auto summary = nlohmann::json::parse(slurp(out / "cat6_summary.json"));
  CHECK(summary["cache_hit"].get<bool>());
  CHECK(summary["p_estimate"]["classified_p2"].get<bool>());

  // kernel CSV header carries the sum, which must be 1
  std::stringstream first_line(kernel1.substr(0, kernel1.find('\n')));
  std::string tok;
  double sum = 0;
  while (first_line >> tok)
    if (tok.rfind("sum=", 0) == 0) sum = std::stod(tok.substr(4));
  CHECK(std::abs(sum - 1.0) < 1e-10);

  SUBCASE("emitted field CSV re-integrates to 1 within 1e-4") {
    const auto sidecar = nlohmann::json::parse(slurp(out / "cat6_field_W1.json"));
    const double step_a = sidecar["grid"]["a_step"].get<double>();
    const double step_b = sidecar["grid"]["b_step"].get<double>();
    std::ifstream f(out / "cat6_field_W1.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "A,B,xi");
    double integral = 0.0;
    while (std::getline(f, line)) {
      const auto p2 = line.rfind(',');
      integral += std::stod(line.substr(p2 + 1));
    }
    integral *= step_a * step_b;  // Riemann; boundary values are ~1e-16
    CHECK(std::abs(integral - 1.0) < 1e-4);
  }

  SUBCASE("SVGs are well-formed enough to open") {
    const std::string svg = slurp(out / "cat6_stem_W0.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("negative") != std::string::npos);  // stem legend
  }
}

TEST_CASE("state dump plus custom-file round trip") {
  const fs::path out = fresh_dir("mvis_cli_state");
  const std::string dump = (out / "g8.mvis").string();
  REQUIRE(run("state --scenario grover --size 8 --dump " + dump + " --out " + out.string())
              .exit_code == 0);
  REQUIRE(fs::exists(dump));
  const RunResult r = run("xi --scenario custom-file --state-file " + dump +
                          " --ops Mx-z,My --W 0,1 --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "custom-file8_kernel.csv"));
  CHECK(fs::exists(out / "custom-file8_field_W1.csv"));
}

TEST_CASE("vcm subcommand emits the spectrum report") {
  const fs::path out = fresh_dir("mvis_cli_vcm");
  const RunResult r =
      run("vcm --scenario heisenberg --size 6 --lattice rect:2x3:obc --out " + out.string());
  REQUIRE(r.exit_code == 0);
  const auto rep = nlohmann::json::parse(slurp(out / "heisenberg6_vcm.json"));
  CHECK(rep["eigenvalues"].size() == 18);
  CHECK(rep["S"].size() >= 3);
  // staggered triple present with coefficients
  bool found = false;
  for (const auto& m : rep["S"])
    if (m["label"] == "Mx_st") {
      found = true;
      CHECK(m["hermitian"].get<bool>());
      CHECK(m["coeffs"].size() == 18);
    }
  CHECK(found);
}

TEST_CASE("scan subcommands") {
  const fs::path out = fresh_dir("mvis_cli_scan");
  SUBCASE("W scan at fixed size") {
    const RunResult r = run("scan --scenario cat --size 8 --W 0.5,1,2 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(out / "cat8_scanW.csv");
    CHECK(csv.find("N,W,I") != std::string::npos);
    // three data rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  }
  SUBCASE("N scan under a rule") {
    const RunResult r =
        run("scan --scenario separable --w-rule sqrtN --sizes 6,8,10 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    bool have_csv = false;
    for (const auto& e : fs::directory_iterator(out))
      if (e.path().string().find("scanN") != std::string::npos &&
          e.path().extension() == ".csv")
        have_csv = true;
    CHECK(have_csv);
  }
  SUBCASE("empty W list is a usage error (exit 2)") {
    const RunResult r = run("scan --scenario cat --size 8 --W '' --out " + out.string());
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("\"type\":\"config\"") != std::string::npos);
  }
}

TEST_CASE("config errors exit with code 2 and machine-readable JSON") {
  const fs::path out = fresh_dir("mvis_cli_err");
  const RunResult r = run("analyze --scenario nosuch --out " + out.string());
  CHECK(r.exit_code == 2);
  const auto pos = r.out.find('{');
  REQUIRE(pos != std::string::npos);
  const auto err = nlohmann::json::parse(r.out.substr(pos));
  CHECK(err["error"]["type"] == "config");
  // frustrated staggering error names the odd dimension
  const RunResult r2 = run("analyze --scenario heisenberg --size 14 --lattice rect:2x7:pbc "
                           "--p-sizes none --out " +
                           out.string());
  CHECK(r2.exit_code == 2);
  CHECK(r2.out.find("7") != std::string::npos);
}

TEST_CASE("config file supplies defaults that flags override") {
  const fs::path out = fresh_dir("mvis_cli_cfg");
  const fs::path cfg = out / "cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({"scenario": "cat", "size": 6, "W": "0", "p-sizes": "none"})";
  }
  const RunResult r =
      run("analyze --config " + cfg.string() + " --out " + out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(out / "cat6_kernel.csv"));
  // explicit flag wins over the config value
  const RunResult r2 = run("analyze --config " + cfg.string() + " --size 8 --out " +
                           out.string());
  REQUIRE(r2.exit_code == 0);
  CHECK(fs::exists(out / "cat8_kernel.csv"));
}
