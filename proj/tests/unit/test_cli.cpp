#include <random>
#include <sstream>

#include "doctest.h"
#include "evspace/tools/cli.hpp"
#include "nlohmann/json.hpp"
#include "support/temp_dir.hpp"

using evspace::testing::TempDir;
using evspace::tools::run_cli;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kSample = std::string(EVSPACE_DATA_DIR) + "/sample_project.json";

}  // namespace

TEST_CASE("eval prints a display value") {
  TempDir dir("evspace_cli");
  const std::string lib = dir.file("lib.json");
  Run r = cli({"--library", lib, "eval", "--project", kSample, "NPV", "ncf=net_cash_flow",
               "rate=0.1"});
  CHECK(r.code == 0);
  CHECK(r.out == "-0.525920\n");

  r = cli({"--library", lib, "eval", "IPR", "profit=20", "investment=100"});
  CHECK(r.code == 0);
  CHECK(r.out == "0.200000\n");

  r = cli({"--library", lib, "--format", "machine", "eval", "IPR", "profit=20",
           "investment=100"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out) == json{{"status", "ok"}, {"value", 0.2}, {"data", {{"method", "IPR"}}}});
}

TEST_CASE("evaluation failures exit 1 with an envelope") {
  TempDir dir("evspace_cli");
  const std::string lib = dir.file("lib.json");
  Run r = cli({"--library", lib, "--format", "machine", "eval", "--project", kSample, "NPV",
               "ncf=missing", "rate=0.1"});
  CHECK(r.code == 1);
  CHECK(json::parse(r.out)["status"] == "FieldNotFound");

  r = cli({"--library", lib, "eval", "IPR", "profit=20", "investment=0"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("DivideByZero: ", 0) == 0);

  r = cli({"--library", lib, "eval", "--project", dir.file("absent.json"), "IRR",
           "ncf=net_cash_flow"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("IoError", 0) == 0);

  r = cli({"--library", lib, "eval", "nothing"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("UnknownEvent", 0) == 0);
}

TEST_CASE("define, list and remove persist through the library") {
  TempDir dir("evspace_cli");
  const std::string lib = dir.file("lib.json");
  Run r = cli({"--library", lib, "define", "--name", "npv_at_12", "--params", "ncf:field",
               "--expr", "NPV(ncf, 12%)", "--desc", "hurdle rate"});
  CHECK(r.code == 0);
  CHECK(r.out == "defined npv_at_12\n");
  CHECK(std::filesystem::exists(lib));

  r = cli({"--library", lib, "eval", "--project", kSample, "npv_at_12", "ncf=net_cash_flow"});
  CHECK(r.code == 0);

  r = cli({"--library", lib, "define", "--name", "npv_at_12", "--expr", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("DuplicateName", 0) == 0);

  r = cli({"--library", lib, "list"});
  CHECK(r.code == 0);
  CHECK(r.out.find("NPV(ncf:field, rate:number)  [built-in]") != std::string::npos);
  CHECK(r.out.find("npv_at_12(ncf:field)  npv_at_12") != std::string::npos);

  r = cli({"--library", lib, "--format", "machine", "list"});
  CHECK(json::parse(r.out).size() == 6);

  r = cli({"--library", lib, "remove", "NPV"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("BuiltInProtected", 0) == 0);

  r = cli({"--library", lib, "remove", "npv_at_12"});
  CHECK(r.code == 0);
  r = cli({"--library", lib, "--format", "machine", "list"});
  CHECK(json::parse(r.out).size() == 5);
}

TEST_CASE("library location falls back to the environment variable") {
  TempDir dir("evspace_cli");
  const std::string lib = dir.file("env_lib.json");
  ::setenv(evspace::tools::kLibraryEnvVar, lib.c_str(), 1);
  Run r = cli({"define", "--name", "twice", "--params", "x:number", "--expr", "x * 2"});
  ::unsetenv(evspace::tools::kLibraryEnvVar);
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(lib));
}

TEST_CASE("sense prints one row per delta") {
  TempDir dir("evspace_cli");
  Run r = cli({"--library", dir.file("lib.json"), "sense", "--project", kSample, "--vary",
               "rate", "--deltas", "-0.2:0.2:5", "NPV", "ncf=net_cash_flow", "rate=0.1"});
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int count = 0;
  std::getline(lines, line);
  CHECK(line == "delta,value,status");
  while (std::getline(lines, line)) {
    ++count;
    CHECK(line.substr(line.rfind(',') + 1) == "ok");
  }
  CHECK(count == 5);
}

TEST_CASE("usage errors exit 2") {
  TempDir dir("evspace_cli");
  const std::string lib = dir.file("lib.json");
  CHECK(cli({}).code == 2);
  CHECK(cli({"--bogus"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"--library", lib, "eval"}).code == 2);
  CHECK(cli({"--library", lib, "eval", "IPR", "profit"}).code == 2);
  CHECK(cli({"--library", lib, "--format", "xml", "list"}).code == 2);
  CHECK(cli({"--library", lib, "define", "--name", "x", "--params", "a:text", "--expr", "a"})
            .code == 2);
  CHECK(cli({"--library", lib, "sense", "--vary", "rate", "--deltas", "abc", "NPV"}).code == 2);
  CHECK(cli({"--library", lib, "serve", "--port", "70000"}).code == 2);
  Run help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("eval") != std::string::npos);
}

TEST_CASE("arbitrary argument vectors never crash") {
  TempDir dir("evspace_cli");
  const std::string lib = dir.file("lib.json");
  const std::vector<std::string> pieces{
      "eval", "define", "list", "remove", "sense", "--project", kSample, "--name", "--params",
      "--expr", "--vary", "--deltas", "--format", "machine", "text", "NPV", "IRR", "IPR",
      "ncf=net_cash_flow", "rate=0.1", "profit=1", "investment=0", "x:number", "1 +", "0:1:3",
      "=", "", "-", "--", "a=b=c", "npv_at_12", "--desc"};
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> args{"--library", lib};
    const int n = static_cast<int>(rng() % 7);
    for (int k = 0; k < n; ++k) args.push_back(pieces[rng() % pieces.size()]);
    CAPTURE(i);
    const int code = cli(args).code;
    CHECK((code == 0 || code == 1 || code == 2));
  }
}
