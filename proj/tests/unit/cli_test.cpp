#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "../process.hpp"
#include "../support.hpp"
#include "smpa/store.hpp"

using namespace smpa;
using nlohmann::json;
using testing::run_cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("cli bank commands") {
  auto r = run_cli({"bank", "stats", testing::kSampleBank.string()});
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("173") != std::string::npos);
  CHECK(r.output.find("151") != std::string::npos);

  r = run_cli({"--output", "structured", "bank", "stats", testing::kSampleBank.string()});
  REQUIRE(r.exit_code == 0);
  const auto stats = json::parse(r.output);
  CHECK(stats["total_questions"] == 173);
  CHECK(stats["knowledge_items"] == 151);

  r = run_cli({"bank", "validate", testing::kSampleBank.string()});
  CHECK(r.exit_code == 0);

  testing::TempDir dir;
  auto doc = testing::sample_bank()->to_json();
  doc["questions"][5]["attribute"] = "PA3.1";
  std::ofstream(dir.path() / "bad.json") << doc.dump();
  r = run_cli({"bank", "validate", (dir.path() / "bad.json").string()});
  CHECK(r.exit_code == 1);
  CHECK(r.errors.find("questions[5].scope") != std::string::npos);
}

TEST_CASE("cli usage errors exit 2") {
  CHECK(run_cli({"no-such-command"}).exit_code == 2);
  CHECK(run_cli({"bank", "stats"}).exit_code == 2);
  CHECK(run_cli({"--output", "yaml", "bank", "stats", "x"}).exit_code == 2);
  CHECK(run_cli({"--help"}).exit_code == 0);
  CHECK(run_cli({"measure", "--help"}).exit_code == 0);
}

TEST_CASE("cli select") {
  testing::TempDir dir;
  std::ofstream(dir.path() / "sel.json") << R"({
    "drivers": [{"process": "A", "perspective": "Customer", "importance": 5},
                {"process": "B", "perspective": "Customer", "importance": 3}],
    "gaps": [{"process": "A", "expectation": 6, "perception": 3},
             {"process": "B", "expectation": 7, "perception": 1}]
  })";
  auto r = run_cli({"--output", "structured", "select", "--input",
                    (dir.path() / "sel.json").string(), "--top", "1"});
  REQUIRE(r.exit_code == 0);
  const auto out = json::parse(r.output);
  CHECK(out.size() == 1);
  r = run_cli({"select", "--input", (dir.path() / "sel.json").string(), "--weights", "0.9,0.9"});
  CHECK(r.exit_code == 1);
}

TEST_CASE("cli offline lifecycle and determinism") {
  testing::TempDir dir;
  const std::vector<std::string> env = {"DATA_DIR=" + (dir.path() / "data").string(),
                                        "BANK_PATH=" + testing::kSampleBank.string(),
                                        "SMPA_NOW=2024-06-11T09:00:00Z"};
  const auto profile = (testing::kSourceDir / "tests/golden/profile.json").string();

  auto r = run_cli({"assessment", "create", "--processes", "PRB,CFG", "--id", "x1"}, env);
  REQUIRE(r.exit_code == 0);
  r = run_cli({"assessment", "create", "--processes", "NOPE"}, env);
  CHECK(r.exit_code == 1);
  CHECK(r.errors.find("UnknownProcess") != std::string::npos);
  r = run_cli({"assessment", "close", "x1"}, env);
  CHECK(r.exit_code == 1);

  REQUIRE(run_cli({"assessment", "open", "x1"}, env).exit_code == 0);

  // Roster processes outside the assessment are rejected; use a tailored profile.
  auto doc = json::parse(slurp(profile));
  json roster = json::array();
  for (const auto& p : doc["roster"]) {
    json keep = json::array();
    for (const auto& a : p["assignments"]) {
      if (a["process"] == "PRB" || a["process"] == "CFG") keep.push_back(a);
    }
    if (!keep.empty()) roster.push_back({{"name", p["name"]}, {"assignments", keep}});
  }
  doc["roster"] = roster;
  std::ofstream(dir.path() / "profile.json") << doc.dump(2);

  const auto out1 = (dir.path() / "r1.json").string();
  const auto out2 = (dir.path() / "r2.json").string();
  r = run_cli({"simulate", "x1", "--profile", (dir.path() / "profile.json").string(), "--seed",
               "11", "--out", out1},
              env);
  REQUIRE(r.exit_code == 0);
  // Same seed, roster reused by name, nothing new submitted.
  r = run_cli({"simulate", "x1", "--profile", (dir.path() / "profile.json").string(), "--seed",
               "11", "--out", out2, "--no-submit"},
              env);
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK_FALSE(slurp(out1).empty());

  r = run_cli({"--output", "structured", "progress", "x1"}, env);
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.output)["completion"] == 1.0);

  r = run_cli({"measure", "x1"}, env);
  CHECK(r.exit_code == 1);
  REQUIRE(run_cli({"assessment", "close", "x1"}, env).exit_code == 0);
  r = run_cli({"--output", "structured", "measure", "x1"}, env);
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.output)["processes"].size() == 2);

  r = run_cli({"report", "generate", "x1", "--format", "pdf"}, env);
  CHECK(r.exit_code == 1);
  r = run_cli({"report", "generate", "x1", "--format", "markdown"}, env);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("## Summary") != std::string::npos);
  r = run_cli({"assessment", "show", "x1"}, env);
  CHECK(r.output.find("Reported") != std::string::npos);
}

TEST_CASE("cli respond imports a responses file") {
  testing::TempDir dir;
  const std::vector<std::string> env = {"DATA_DIR=" + (dir.path() / "data").string(),
                                        "BANK_PATH=" + testing::kSampleBank.string()};
  REQUIRE(run_cli({"assessment", "create", "--processes", "PRB", "--id", "r1"}, env).exit_code ==
          0);
  REQUIRE(run_cli({"participant", "register", "r1", "--name", "Robin", "--assign",
                   "PRB:ProcessManager"},
                  env)
              .exit_code == 0);
  REQUIRE(run_cli({"assessment", "open", "r1"}, env).exit_code == 0);
  std::ofstream(dir.path() / "resp.json") << R"({"responses": [
    {"participant": "p001", "process": "PRB", "question": "PRB-1.1-02", "answer": "L"}]})";
  auto r = run_cli({"respond", "r1", "--file", (dir.path() / "resp.json").string()}, env);
  CHECK(r.exit_code == 0);
  std::ofstream(dir.path() / "bad.json") << R"({"responses": [
    {"participant": "p001", "process": "PRB", "question": "SLM-1.1-01", "answer": "L"}]})";
  r = run_cli({"respond", "r1", "--file", (dir.path() / "bad.json").string()}, env);
  CHECK(r.exit_code == 1);
  CHECK(r.errors.find("NotAllocated") != std::string::npos);
}

TEST_CASE("cli refuses a locked store") {
  testing::TempDir dir;
  Store held(dir.path(), testing::sample_bank());
  const auto r = run_cli({"assessment", "list"}, {"DATA_DIR=" + dir.path().string(),
                                                  "BANK_PATH=" + testing::kSampleBank.string()});
  CHECK(r.exit_code == 1);
  CHECK(r.errors.find("StoreLocked") != std::string::npos);
}
