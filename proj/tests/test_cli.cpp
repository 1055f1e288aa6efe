#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "pslab/cli.hpp"

using namespace pslab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path only_run_dir(const fs::path& suite_dir, std::size_t index) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(suite_dir)) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  REQUIRE(dirs.size() > index);
  return dirs[index];
}

}  // namespace

TEST_CASE("config validation names the first offending key") {
  ExperimentConfig c;
  c.mode = "verify";
  c.suite = "parity";

  SECTION("unknown suite") {
    c.suite = "nonsense";
    REQUIRE_THROWS_WITH(validate_config(c), Catch::Matchers::ContainsSubstring("'suite'"));
  }
  SECTION("bad grid size") {
    c.size = 100;
    REQUIRE_THROWS_WITH(validate_config(c), Catch::Matchers::ContainsSubstring("'size'"));
  }
  SECTION("bad rational") {
    c.s = "half";
    REQUIRE_THROWS_WITH(validate_config(c), Catch::Matchers::ContainsSubstring("'s'"));
  }
  SECTION("bad horizon") {
    c.T = -1.0;
    REQUIRE_THROWS_WITH(validate_config(c), Catch::Matchers::ContainsSubstring("'T'"));
  }
  SECTION("valid config passes") { REQUIRE_NOTHROW(validate_config(c)); }
}

TEST_CASE("admissibility corner: the q = inf request is refused for n = 2") {
  ExperimentConfig c;
  c.mode = "scan";
  c.suite = "strichartz";
  c.n = 2;
  c.q = "inf";
  REQUIRE_THROWS_WITH(validate_config(c), Catch::Matchers::ContainsSubstring("admissibility"));
  c.n = 3;
  // for n = 3, q = inf forces 1/p = 3/4 > 1/2: no admissible partner
  REQUIRE_THROWS_WITH(validate_config(c), Catch::Matchers::ContainsSubstring("'q'"));
  c.q = "6";
  REQUIRE_NOTHROW(validate_config(c));  // the endpoint pair (2, 6)
}

TEST_CASE("run rejects invalid configs with exit code 2") {
  ExperimentConfig c;
  c.mode = "verify";
  c.suite = "parity";
  c.size = 77;
  c.outdir = (fs::temp_directory_path() / "pslab_cli_invalid").string();
  REQUIRE(run(c) == 2);
}

TEST_CASE("run writes manifest, report, table and schema") {
  fs::path out = fs::temp_directory_path() / "pslab_cli_artifacts";
  fs::remove_all(out);
  ExperimentConfig c;
  c.mode = "verify";
  c.suite = "parity";
  c.size = 32;
  c.family = 2;
  c.outdir = out.string();
  REQUIRE(run(c) == 0);
  fs::path dir = only_run_dir(out / "parity", 0);
  for (const char* name : {"manifest.json", "report.json", "table.csv", "table.schema.json"})
    REQUIRE(fs::exists(dir / name));

  nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  REQUIRE(manifest["seed"] == 12345);
  REQUIRE(manifest.contains("config_hash"));
  REQUIRE(manifest["modules"].contains("spectral_core"));
  nlohmann::json report = nlohmann::json::parse(slurp(dir / "report.json"));
  REQUIRE(report["checks"].size() >= 1);
  for (const auto& chk : report["checks"]) REQUIRE(chk["passed"] == true);
}

TEST_CASE("reruns with the same seed are byte-identical modulo timestamps") {
  fs::path out = fs::temp_directory_path() / "pslab_cli_determinism";
  fs::remove_all(out);
  ExperimentConfig c;
  c.mode = "scan";
  c.suite = "k-functional";
  c.size = 32;
  c.family = 3;
  c.seed = 777;
  c.outdir = out.string();
  REQUIRE(run(c) == 0);
  std::this_thread::sleep_for(std::chrono::milliseconds(1100));  // distinct timestamp dir
  REQUIRE(run(c) == 0);
  fs::path first = only_run_dir(out / "k-functional", 0);
  fs::path second = only_run_dir(out / "k-functional", 1);
  REQUIRE(first != second);
  REQUIRE(slurp(first / "report.json") == slurp(second / "report.json"));
  REQUIRE(slurp(first / "table.csv") == slurp(second / "table.csv"));
}

TEST_CASE("worker pool matches the serial result") {
  fs::path out = fs::temp_directory_path() / "pslab_cli_workers";
  fs::remove_all(out);
  ExperimentConfig c;
  c.mode = "scan";
  c.suite = "strichartz";
  c.n = 2;
  c.size = 32;
  c.pairs = 1;
  c.family = 4;
  c.M = 16;
  c.outdir = out.string();
  c.workers = 1;
  REQUIRE(run(c) == 0);
  std::this_thread::sleep_for(std::chrono::milliseconds(1100));
  c.workers = 2;
  REQUIRE(run(c) == 0);
  fs::path serial = only_run_dir(out / "strichartz", 0);
  fs::path pooled = only_run_dir(out / "strichartz", 1);
  REQUIRE(slurp(serial / "table.csv") == slurp(pooled / "table.csv"));
}

TEST_CASE("config file values load and flags keep their defaults semantics") {
  fs::path cfg_path = fs::temp_directory_path() / "pslab_cli_config.json";
  {
    std::ofstream os(cfg_path);
    os << R"({"mode":"verify","suite":"parity","size":32,"family":2,"seed":4242})";
  }
  ExperimentConfig c;
  c.load_json(cfg_path.string());
  REQUIRE(c.suite == "parity");
  REQUIRE(c.size == 32);
  REQUIRE(c.seed == 4242);
  REQUIRE(c.T == 1.0);  // untouched default
}
