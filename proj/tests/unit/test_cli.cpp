#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "detflops/charts.h"
#include "detflops/cli.h"
#include "doctest.h"

namespace fs = std::filesystem;
using detflops::read_text_file;
using detflops::write_text_file;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = detflops::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("detflops-cli-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const {
    return (dir / name).string();
  }
};

}  // namespace

TEST_CASE("profile prints the total and echoes the config") {
  const Run r = run({"profile", "--config", "baseline-800"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("config baseline-800: {", 0) == 0);
  CHECK(r.out.find("GMACs: 146.246\n") != std::string::npos);
  CHECK(r.out.find("Params: 37968692\n") != std::string::npos);
  CHECK(r.out.find("D3 fraction: 0.44") != std::string::npos);
}

TEST_CASE("profile with two FLOPs per MAC doubles GFLOPs only") {
  const Run r =
      run({"profile", "--config", "baseline-800", "--macs-per-flop", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("GMACs: 146.246\n") != std::string::npos);
  CHECK(r.out.find("GFLOPs: 292.491") != std::string::npos);
  CHECK(run({"profile", "--config", "baseline-800", "--macs-per-flop", "3"})
            .code == 1);
}

TEST_CASE("profile reads a config file and writes CSV and JSON") {
  Scratch tmp;
  write_text_file(tmp("cfg.json"), R"({"input_size": 512})");
  const Run r = run({"profile", "--config", tmp("cfg.json"), "--csv",
                     tmp("r.csv"), "--json", tmp("r.json")});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("config cfg: ", 0) == 0);
  CHECK(read_text_file(tmp("r.csv")).rfind("block,branch,macs,params,fraction\n",
                                           0) == 0);
  CHECK(fs::file_size(tmp("r.json")) > 0);
}

TEST_CASE("transform rejects mixed variants inside a sharing set") {
  Scratch tmp;
  write_text_file(tmp("t.json"), R"([
    {"type": "SetSharing", "scheme": "FullyShared"},
    {"type": "SubstituteHead", "variant": "V3", "branches": ["Regression"],
     "levels": [3]},
    {"type": "SetSharing", "scheme": "FullyShared"}])");
  const Run r = run({"transform", "--config", "baseline-800", "--apply",
                     tmp("t.json"), "--out", tmp("out.json")});
  CHECK(r.code == 2);
  CHECK(r.err.find("WeightGroupMismatch") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp("out.json")));
}

TEST_CASE("transform writes the resulting config") {
  Scratch tmp;
  write_text_file(tmp("t.json"),
                  R"({"type": "SubstituteHead", "variant": "V3",
                      "branches": ["Regression"], "levels": [3]})");
  const Run r = run({"transform", "--config", "baseline-800", "--apply",
                     tmp("t.json"), "--out", tmp("out.json")});
  CHECK(r.code == 0);
  const Run p = run({"profile", "--config", tmp("out.json")});
  CHECK(p.code == 0);
  CHECK(p.out.rfind("config lw-v3-reg: ", 0) == 0);
}

TEST_CASE("sweep with an empty suite gives only the baseline") {
  Scratch tmp;
  write_text_file(tmp("suite.json"), "{}");
  const Run r = run({"sweep", "--config", "baseline-800", "--suite",
                     tmp("suite.json"), "--csv", tmp("p.csv")});
  CHECK(r.code == 0);
  const std::string csv = read_text_file(tmp("p.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find("\nbaseline-800,Proposed,") != std::string::npos);
}

TEST_CASE("sweep reports failed chains and still writes the rest") {
  Scratch tmp;
  write_text_file(tmp("suite.json"), R"({"chains": [
      {"label": "tiny", "transforms": [{"type": "ScaleInput", "target_size": 16}]},
      {"label": "v3", "transforms": [{"type": "SubstituteHead", "variant": "V3"}]}],
    "input_scaling_sizes": [640]})");
  const Run r = run({"sweep", "--config", "baseline-800", "--suite",
                     tmp("suite.json"), "--csv", tmp("p.csv")});
  CHECK(r.code == 2);
  CHECK(r.err.find("chain 'tiny' failed") != std::string::npos);
  const std::string csv = read_text_file(tmp("p.csv"));
  CHECK(csv.find("\nv3,") != std::string::npos);
  CHECK(csv.find("\ninput-640,InputScaling,") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"profile"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"profile", "--config", "/nonexistent/cfg.json"}).code == 3);
  CHECK(run({"render", "--out", "/tmp/x.svg"}).code == 1);

  Scratch tmp;
  write_text_file(tmp("bad.json"), "{not json");
  CHECK(run({"profile", "--config", tmp("bad.json")}).code == 2);
  write_text_file(tmp("unknown.json"), R"({"depth": 101})");
  CHECK(run({"profile", "--config", tmp("unknown.json")}).code == 2);
}

TEST_CASE("compare prints deltas and parameter overhead") {
  const Run r = run({"compare", "--a", "baseline-800", "--b", "lw-v3-reg"});
  CHECK(r.code == 0);
  CHECK(r.out.find("param_overhead: 0.9117%") != std::string::npos);
  CHECK(r.out.find("reduction factor: 1.1674") != std::string::npos);

  const Run all = run({"compare", "--a", "baseline-800", "--all-presets"});
  CHECK(all.code == 0);
  CHECK(all.out.find("== vs lw-v3-both-pred") != std::string::npos);
  CHECK(run({"compare", "--a", "baseline-800"}).code == 1);
}

TEST_CASE("render both chart kinds") {
  Scratch tmp;
  REQUIRE(run({"sweep", "--config", "baseline-800", "--csv", tmp("p.csv")})
              .code == 0);
  REQUIRE(run({"profile", "--config", "baseline-800", "--json", tmp("r.json")})
              .code == 0);
  CHECK(run({"render", "--points", tmp("p.csv"), "--out", tmp("t.svg")}).code ==
        0);
  CHECK(run({"render", "--report", tmp("r.json"), "--out", tmp("d.svg")})
            .code == 0);
  CHECK(read_text_file(tmp("t.svg")).rfind("<svg", 0) == 0);
  CHECK(read_text_file(tmp("d.svg")).find("class=\"macs\"") !=
        std::string::npos);
  CHECK(run({"render", "--points", tmp("p.csv"), "--out",
             "/nonexistent-dir/t.svg"})
            .code == 3);
}

TEST_CASE("repeat runs are byte-identical") {
  Scratch tmp;
  for (const char* name : {"a", "b"}) {
    const std::string p = tmp(name);
    REQUIRE(run({"sweep", "--config", "baseline-800", "--csv", p + ".csv",
                 "--json", p + ".json"})
                .code == 0);
    REQUIRE(run({"profile", "--config", "lw-v3-both-pred", "--json",
                 p + ".r.json", "--csv", p + ".r.csv"})
                .code == 0);
  }
  for (const char* ext : {".csv", ".json", ".r.json", ".r.csv"}) {
    CHECK(read_text_file(tmp("a") + ext) == read_text_file(tmp("b") + ext));
  }
}

TEST_CASE("the installed binary maps exit codes to the process status") {
  const std::string tool = DETFLOPS_TOOL_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("profile --config baseline-800") == 0);
  CHECK(status("profile") == 1);
  CHECK(status("profile --config /nonexistent/cfg.json") == 3);
}
