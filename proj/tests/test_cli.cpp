#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "trajset/io.hpp"

// End-to-end pipeline through the command-line binary. The binary path comes
// from the TRAJSET_CLI environment variable (set by ctest).

namespace {

std::string cli_path() {
  const char* path = std::getenv("TRAJSET_CLI");
  return path != nullptr ? path : "";
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("cli pipeline runs end to end and is seed-reproducible") {
  if (cli_path().empty()) {
    MESSAGE("TRAJSET_CLI not set, skipping");
    return;
  }
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "trajset_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();

  REQUIRE(run("synth --out " + d + "/data.ds --n-vehicles 60 "
              "--n-pedestrians 20 --seed 5") == 0);
  REQUIRE(run("synth --out " + d + "/data2.ds --n-vehicles 60 "
              "--n-pedestrians 20 --seed 5") == 0);
  CHECK(slurp(dir / "data.ds") == slurp(dir / "data2.ds"));

  REQUIRE(run("generate-set --dataset " + d + "/data.ds --size 16 --out " +
              d + "/mixed.set --seed 1") == 0);
  REQUIRE(run("generate-set --dataset " + d +
              "/data.ds --algorithm bagging --epsilon 3 --out " + d +
              "/bag.set") == 0);
  REQUIRE(run("generate-set --dataset " + d +
              "/data.ds --size 8 --class-specific --out " + d +
              "/groups.set") == 0);
  REQUIRE(fs::exists(dir / "groups.nonvulnerable.set"));
  REQUIRE(fs::exists(dir / "groups.vulnerable.set"));
  REQUIRE(fs::exists(dir / "mixed.curve.csv"));

  REQUIRE(run("eval-set --dataset " + d + "/data.ds --set " + d +
              "/mixed.set --set " + d + "/bag.set --json") == 0);

  REQUIRE(run("train --dataset " + d + "/data.ds --set " + d +
              "/mixed.set --out " + d +
              "/model.ckpt --hidden 64 --feature-size 32 --seed 2") == 0);

  REQUIRE(run("predict --checkpoint " + d + "/model.ckpt --dataset " + d +
              "/data.ds --set " + d + "/mixed.set --k 6 --out-csv " + d +
              "/preds.csv --out-report " + d + "/report.txt") == 0);
  const auto report =
      trajset::io::read_report((dir / "report.txt").string());
  CHECK(report.k == 6);
  CHECK(report.n_sequences == 80);

  // --no-nms equals r-nms 0.
  REQUIRE(run("predict --checkpoint " + d + "/model.ckpt --dataset " + d +
              "/data.ds --set " + d + "/mixed.set --k 6 --no-nms "
              "--out-report " + d + "/r0a.txt") == 0);
  REQUIRE(run("predict --checkpoint " + d + "/model.ckpt --dataset " + d +
              "/data.ds --set " + d + "/mixed.set --k 6 --r-nms 0 "
              "--out-report " + d + "/r0b.txt") == 0);
  CHECK(slurp(dir / "r0a.txt") == slurp(dir / "r0b.txt"));

  REQUIRE(run("report-rcc --checkpoint " + d + "/model.ckpt --json") == 0);
  REQUIRE(run("bench --dataset " + d + "/data.ds --sizes 4 8 --json") == 0);

  // Unknown option and missing file produce nonzero exits.
  CHECK(run("predict --checkpoint " + d + "/missing.ckpt --dataset " + d +
            "/data.ds --set " + d + "/mixed.set") != 0);
  CHECK(run("synth --bogus-flag 1") != 0);

  fs::remove_all(dir);
}
