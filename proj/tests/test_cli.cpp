#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ENERGYTEST_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Run r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("energytest_cli_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(path); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch() {
  static const ScratchDir dir;
  return dir.path;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << content;
  return p;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

const std::string kSampleA = "a,b\n0.1,1.2\n-0.3,0.4\n1.1,NA\n0.7,-0.2\n-1.0,0.5\n0.2,0.9\n";
const std::string kSampleB = "a,b\n2.1,3.2\n1.7,2.4\nNA,2.0\n2.9,1.8\n3.0,2.5\n2.2,NA\n";

} // namespace

TEST_CASE("help documents every subcommand and flag") {
  const auto top = run("--help");
  CHECK(top.code == 0);
  for (const char* sub : {"test", "simulate", "calibrate", "report"})
    CHECK(top.output.find(sub) != std::string::npos);
  const auto test = run("test --help");
  CHECK(test.code == 0);
  for (const char* flag : {"--x", "--y", "--stat", "--imputer", "--k", "--bootstrap", "--B",
                           "--alpha", "--seed", "--out"})
    CHECK(test.output.find(flag) != std::string::npos);
  const auto sim = run("simulate --help");
  for (const char* flag : {"--config", "--jobs", "--out-dir"})
    CHECK(sim.output.find(flag) != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("").code == 2);
  CHECK(run("test --bogus 1").code == 2);
  CHECK(run("frobnicate").code == 2);
  const auto a = write_file("a.csv", kSampleA);
  CHECK(run("test --x " + quoted(a) + " --y /nonexistent.csv").code == 2);
  const auto wide = write_file("wide.csv", "1,2,3\n4,5,6\n");
  const auto mismatch = run("test --x " + quoted(a) + " --y " + quoted(wide));
  CHECK(mismatch.code == 2);
  CHECK(mismatch.output.find("dimension") != std::string::npos);
  CHECK(run("test --x " + quoted(a) + " --y " + quoted(a) + " --stat nope").code == 2);
}

TEST_CASE("test command") {
  const auto a = write_file("a.csv", kSampleA);
  const auto b = write_file("b.csv", kSampleB);

  const auto holes = write_file("holes.csv", "a,b\n1,NA\nNA,2\n");
  const auto cc = run("test --x " + quoted(holes) + " --y " + quoted(b) + " --stat cc");
  CHECK(cc.code == 2);
  CHECK(cc.output.find("no complete cases") != std::string::npos);

  const auto text = run("test --x " + quoted(a) + " --y " + quoted(b) + " --B 199 --seed 4");
  CHECK(text.code == 0);
  CHECK(text.output.find("p-value") != std::string::npos);
  CHECK(text.output.find("decision") != std::string::npos);

  const std::string args = "test --x " + quoted(a) + " --y " + quoted(b) +
                           " --stat impute --imputer knn --k 2 --B 99 --seed 4 --out json";
  const auto first = run(args);
  const auto second = run(args);
  REQUIRE(first.code == 0);
  CHECK(first.output == second.output);
  const auto j = json::parse(first.output);
  CHECK(j.at("procedure") == "alg3_knn");
  CHECK(j.at("B") == 99);
  CHECK(j.at("p_value").get<double>() >= 0.0);

  const auto saved = write_file("result.json", first.output);
  const auto again = run("report " + quoted(saved) + " --format json");
  CHECK(again.code == 0);
  CHECK(json::parse(again.output) == j);
  const auto as_text = run("report " + quoted(saved));
  CHECK(as_text.output.find("Alg3 2NN") != std::string::npos);

  const auto broken = write_file("broken.json", R"j({"kind": "energy_test"})j");
  CHECK(run("report " + quoted(broken)).code == 2);

  const auto split_impute = run("test --x " + quoted(a) + " --y " + quoted(b) +
                                " --stat impute --bootstrap split");
  CHECK(split_impute.code == 2);
}

TEST_CASE("identical files are rarely rejected") {
  const auto a = write_file("a.csv", kSampleA);
  int rejected = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const auto r = run("test --x " + quoted(a) + " --y " + quoted(a) + " --B 99 --out json --seed " +
                       std::to_string(seed));
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.output);
    rejected += j.at("reject").get<bool>();
    CHECK(j.at("p_value").get<double>() >= 0.5);
  }
  CHECK(rejected == 0);
}

TEST_CASE("calibrate command") {
  const auto r = run("calibrate --rate 0.10 --slopes=-1.9,-1.5 --mc 100000 --out json");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.output);
  CHECK(j.at("achieved_rate").get<double>() >= 0.09);
  CHECK(j.at("achieved_rate").get<double>() <= 0.11);

  const auto flat = json::parse(run("calibrate --rate 0.2 --slopes 0 --mc 1000 --out json").output);
  CHECK(flat.at("intercept").get<double>() == doctest::Approx(std::log(0.25)).epsilon(1e-5));

  CHECK(run("calibrate --rate 1.5 --slopes 0").code == 2);
  CHECK(run("calibrate --rate 0.3 --slopes 1 --mc 10 --tol 1e-300").code == 3);
}

TEST_CASE("simulate command") {
  const auto cfg = write_file("tiny.json", R"j({
    "name": "tiny", "n": 12, "m": 10, "replicates": 100, "seed": 2,
    "procedures": ["alg1_w", "alg3_mean"],
    "distributions": ["N(0,I)", "t5(0,I)"],
    "cells": "diagonal",
    "missingness": {"mechanism": "mcar", "p": 0.1}
  })j");
  const auto one = scratch() / "one";
  const auto four = scratch() / "four";
  REQUIRE(run("simulate --quiet --config " + quoted(cfg) + " --out-dir " + quoted(one)).code == 0);
  REQUIRE(run("simulate --quiet --jobs 4 --config " + quoted(cfg) + " --out-dir " + quoted(four)).code ==
          0);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const char* f : {"tiny.csv", "tiny.md"}) {
    CHECK(slurp(one / f) == slurp(four / f));
    CHECK_FALSE(slurp(one / f).empty());
  }
  const auto manifest = json::parse(slurp(one / "tiny.manifest.json"));
  CHECK(manifest.at("cells").size() == 2);
  CHECK(manifest.at("seed") == 2);

  const auto report = run("report " + quoted(one / "tiny.csv") + " --title Tiny");
  CHECK(report.code == 0);
  CHECK(report.output.find("**Tiny**") != std::string::npos);

  const auto empty = write_file("empty.json", R"j({"name": "e", "procedures": [], "distributions": ["N(0,I)"]})j");
  const auto bad = run("simulate --config " + quoted(empty) + " --out-dir " + quoted(one));
  CHECK(bad.code == 2);
  CHECK(bad.output.find("/procedures") != std::string::npos);

  const auto failing = write_file("failing.json", R"j({
    "name": "failing", "n": 5, "m": 5, "replicates": 100, "procedures": ["alg1_cc"],
    "distributions": ["N(0,I)"], "missingness": {"mechanism": "mcar", "p": [0, 0, 1]}
  })j");
  CHECK(run("simulate --quiet --config " + quoted(failing) + " --out-dir " + quoted(one)).code == 3);
}
