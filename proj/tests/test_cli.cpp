#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "floatscope/cli.hpp"

using namespace floatscope;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "floatscope");
  std::vector<const char *> argv;
  for (const std::string &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("check exit codes") {
  CHECK(run({"check", "(- (sqrt (+ x 1)) (sqrt x))", "x=1e100"}).code == 2);
  CHECK(run({"check", "(log 1.0)"}).code == 0);
  CHECK(run({"check", "(sqrt x)", "x=-1"}).code == 1);
  CHECK(run({"check", "(fmod x 1)", "x=1"}).code == 1);
  CHECK(run({"check", "(+ x 1)"}).code == 1);                 // missing binding
  CHECK(run({"check", "(+ x 1)", "y=1"}).code == 1);          // unknown variable
  CHECK(run({"check", "(+ x 1)", "x=1", "--threshold", "0.5"}).code == 1);
  CHECK(run({"check", "(+ x 1)", "x=1", "--threshold", "-4"}).code == 1);
  CHECK(run({"check", "(+ x 1)", "x=1", "--mode", "oracle"}).code == 1);
  CHECK(run({"check", "(+ x 1)", "x=0x1.8p+1"}).code == 0);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"bench", "--help"}).code == 0);
  CHECK(run({}).code == 1);
}

TEST_CASE("check output") {
  Result r = run({"check", "(log (exp x))", "x=1e100", "--format", "json"});
  CHECK(r.code == 2);
  auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["flags"].size() == 1);
  CHECK(j["flags"][0]["kind"] == "overflow-rescue");
  CHECK(j["flags"][0]["op"] == 0);
  CHECK(j["flags"][0]["sources"] == nlohmann::json::array({1}));

  Result t = run({"check", "(sqrt (+ 1 (* x x)))", "x=1e300"});
  CHECK(t.out.find("overflow-rescue") != std::string::npos);
  CHECK(t.out.find("caused by op 2 (*) at (* x x)") != std::string::npos);

  Result f = run({"check", "(FPCore (x) :precision binary32 (+ x 1))", "x=1"});
  CHECK(f.code == 0);
  CHECK(f.out.find("binary32") != std::string::npos);
}

TEST_CASE("bench and compare") {
  Result r = run({"bench", FLOATSCOPE_SUITE, "--inputs", "8", "--format", "json"});
  CHECK((r.code == 0 || r.code == 2));
  auto j = nlohmann::ordered_json::parse(r.out);
  CHECK(j["thresholds"].size() == 11);
  CHECK(j["benchmarks"].size() == 13);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it)
    keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"mode", "seed", "benchmarks", "thresholds", "discarded"});
  CHECK(j["thresholds"][0]["precision"].get<std::string>().rfind("0x", 0) == 0);

  Result a = run({"bench", FLOATSCOPE_SUITE, "--inputs", "4", "--seed", "7", "--format", "json"});
  Result b = run({"bench", FLOATSCOPE_SUITE, "--inputs", "4", "--seed", "7", "--format", "json"});
  CHECK(a.out == b.out);

  Result timed = run({"bench", FLOATSCOPE_SUITE, "--inputs", "2", "--format", "json", "--timing"});
  CHECK(nlohmann::json::parse(timed.out).contains("timing_ms"));

  int dflt = run({"bench", FLOATSCOPE_SUITE, "--inputs", "2", "--thresholds", ""}).code;
  CHECK((dflt == 0 || dflt == 2));
  CHECK(run({"bench", FLOATSCOPE_SUITE, "--thresholds", ","}).code == 1);
  CHECK(run({"bench", FLOATSCOPE_SUITE, "--thresholds", "4,0.5"}).code == 1);
  CHECK(run({"bench", "/nonexistent.fpcore"}).code == 1);
  CHECK(run({"compare", FLOATSCOPE_SUITE, "--thresholds", ","}).code == 1);

  Result c = run({"compare", FLOATSCOPE_SUITE, "--inputs", "4", "--format", "json"});
  auto cj = nlohmann::json::parse(c.out);
  CHECK(cj["modes"].size() == 3);
  CHECK(cj.contains("speedup"));
}

TEST_CASE("FLOATSCOPE_SEED overrides --seed") {
  setenv("FLOATSCOPE_SEED", "7", 1);
  Result env = run({"bench", FLOATSCOPE_SUITE, "--inputs", "3", "--seed", "1", "--format", "json"});
  unsetenv("FLOATSCOPE_SEED");
  Result flag = run({"bench", FLOATSCOPE_SUITE, "--inputs", "3", "--seed", "7", "--format", "json"});
  CHECK(env.out == flag.out);
  setenv("FLOATSCOPE_SEED", "seven", 1);
  CHECK(run({"bench", FLOATSCOPE_SUITE, "--inputs", "3"}).code == 1);
  unsetenv("FLOATSCOPE_SEED");
}
