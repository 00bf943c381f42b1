#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the bwset binary. CTest passes its location through
// the BWSET_BIN environment variable.

namespace fs = std::filesystem;

namespace {

std::string bwset_bin() {
  const char* bin = std::getenv("BWSET_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = bwset_bin() + " " + args + " > " + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::trunc);
  out << body;
}

}  // namespace

TEST_CASE("generate, characterize and report, end to end") {
  auto dir = fresh_dir("bwset_cli_e2e");
  write_file(dir / "spec.json", R"({
    "traces": [
      {"trace_id": "biased", "num_static_branches": 8, "bias": 0.95,
       "total_records": 3000, "rng_seed": 1},
      {"trace_id": "random", "num_static_branches": 8, "bias": 0.5,
       "total_records": 3000, "rng_seed": 2},
      {"trace_id": "loopy", "num_static_branches": 2, "bias": 0.5,
       "pattern_branches": [{"index": 0, "pattern": "TTN"}, {"index": 1, "pattern": "TN"}],
       "total_records": 3000, "rng_seed": 3}
    ]
  })");

  CHECK(run_cli("generate " + (dir / "spec.json").string() + " -o " + dir.string(),
                dir / "gen.log") == 0);
  CHECK(fs::exists(dir / "traces" / "biased.bwt"));
  CHECK(fs::exists(dir / "traces" / "random.bwt"));
  CHECK(fs::exists(dir / "traces" / "loopy.bwt"));
  REQUIRE(fs::exists(dir / "manifest.json"));

  // trim the sweep so the test stays fast: single config + two predictors
  CHECK(run_cli("characterize " + (dir / "manifest.json").string() +
                    " --mode global --global-hist 8 --predictor smith --predictor tage",
                dir / "chr.log") == 0);
  auto summaries = read_file(dir / "analysis" / "summaries.csv");
  CHECK(summaries.find("biased,global,8,0") != std::string::npos);
  CHECK(summaries.find("random,global,8,0") != std::string::npos);
  CHECK(summaries.find("loopy,global,8,0") != std::string::npos);
  auto results = read_file(dir / "analysis" / "results.csv");
  CHECK(results.find("biased,smith,3000,") != std::string::npos);
  CHECK(results.find("loopy,tage,3000,") != std::string::npos);
  CHECK(fs::exists(dir / "analysis" / "reports" / "report_global_8g.csv"));

  // rebuild the aggregate reports from the per-trace rows
  fs::remove_all(dir / "analysis" / "reports");
  CHECK(run_cli("report " + (dir / "analysis").string(), dir / "rep.log") == 0);
  CHECK(fs::exists(dir / "analysis" / "reports" / "report_global_8g.csv"));
}

TEST_CASE("characterize exits 1 on partial failure") {
  auto dir = fresh_dir("bwset_cli_partial");
  write_file(dir / "manifest.json", R"({
    "traces": ["missing.bwt"],
    "synthetics": [{"trace_id": "ok", "num_static_branches": 4, "bias": 0.9,
                    "total_records": 2000, "rng_seed": 5}],
    "configs": [{"mode": "pc"}],
    "predictors": [{"kind": "smith"}],
    "output_dir": "out"
  })");
  CHECK(run_cli("characterize " + (dir / "manifest.json").string(), dir / "log.txt") == 1);
  CHECK(fs::exists(dir / "out" / "errors.log"));
  auto summaries = read_file(dir / "out" / "summaries.csv");
  CHECK(summaries.find("ok,pc,") != std::string::npos);  // good trace still processed
}

TEST_CASE("help exits 0") {
  auto dir = fresh_dir("bwset_cli_help");
  CHECK(run_cli("--help", dir / "help.txt") == 0);
  CHECK(read_file(dir / "help.txt").find("characterize") != std::string::npos);
}

TEST_CASE("invalid inputs exit 2") {
  auto dir = fresh_dir("bwset_cli_invalid");
  write_file(dir / "bad_spec.json", R"({"traces": [{"trace_id": "x"}]})");
  CHECK(run_cli("generate " + (dir / "bad_spec.json").string() + " -o " + dir.string(),
                dir / "log1.txt") == 2);
  write_file(dir / "bad_manifest.json", R"({"configs": [{"mode": "pc"}]})");
  CHECK(run_cli("characterize " + (dir / "bad_manifest.json").string(), dir / "log2.txt") == 2);
  CHECK(run_cli("report " + (dir / "nonexistent").string(), dir / "log3.txt") == 2);
  CHECK(run_cli("frobnicate", dir / "log4.txt") == 2);
}

TEST_CASE("generated trace files are deterministic per seed") {
  auto dir = fresh_dir("bwset_cli_det");
  write_file(dir / "spec.json", R"({"trace_id": "one", "num_static_branches": 4,
    "bias": 0.7, "total_records": 1000, "rng_seed": 11})");
  CHECK(run_cli("generate " + (dir / "spec.json").string() + " -o " + (dir / "a").string(),
                dir / "g1.log") == 0);
  CHECK(run_cli("generate " + (dir / "spec.json").string() + " -o " + (dir / "b").string(),
                dir / "g2.log") == 0);
  CHECK(read_file(dir / "a" / "traces" / "one.bwt") == read_file(dir / "b" / "traces" / "one.bwt"));
}
