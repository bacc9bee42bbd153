#include <doctest.h>

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "../support.hpp"
#include "smpa/bank.hpp"
#include "smpa/error.hpp"

using namespace smpa;
using nlohmann::json;

namespace {

json raw_sample() {
  std::ifstream in(testing::kSampleBank);
  return json::parse(in);
}

json tiny_bank() {
  return json::parse(R"({
    "schema_version": 1,
    "processes": [{"id": "PRB", "name": "Problem Management"}],
    "questions": [
      {"id": "Q1", "attribute": "PA1.1", "scope": {"process": "PRB"},
       "text": "Do you know if problems are recorded?", "roles": ["ProcessPerformer"],
       "knowledge_item": "K1"}
    ],
    "knowledge_items": [
      {"id": "K1", "observation": "Problems are not recorded.",
       "recommendation": "Record problems."}
    ]
  })");
}

ErrorCode code_of(const json& doc, std::string* path = nullptr) {
  try {
    ContentBank::from_json(doc);
  } catch (const Error& e) {
    if (path) *path = e.path();
    return e.code();
  }
  FAIL("bank unexpectedly valid");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("sample bank cardinalities") {
  const auto& bank = *testing::sample_bank();
  CHECK(bank.processes().size() == 4);
  CHECK(bank.questions().size() == 173);
  CHECK(bank.knowledge_items().size() == 151);

  const auto stats = bank_stats(bank);
  CHECK(stats.processes == 4);
  CHECK(stats.total_questions == 173);
  CHECK(stats.process_specific == 46);
  CHECK(stats.generic == 127);
  CHECK(stats.knowledge_items == 151);
  CHECK(stats.questions_with_items == 151);
  CHECK(stats.questions_without_items == 22);
  CHECK(stats.missing_items.size() == 22);
}

TEST_CASE("single question bank coverage") {
  const auto stats = bank_stats(ContentBank::from_json(tiny_bank()));
  CHECK(stats.total_questions == 1);
  CHECK(stats.questions_with_items == 1);
  CHECK(stats.questions_without_items == 0);
}

TEST_CASE("bank round-trips and fingerprints") {
  const auto& bank = *testing::sample_bank();
  const auto again = ContentBank::from_json(bank.to_json());
  CHECK(again == bank);
  CHECK(again.fingerprint() == bank.fingerprint());
  CHECK(bank.fingerprint().size() == 64);

  auto edited = raw_sample();
  edited["questions"][0]["text"] = "Changed?";
  CHECK(ContentBank::from_json(edited).fingerprint() != bank.fingerprint());
}

TEST_CASE("bank validation errors") {
  std::string path;

  auto doc = tiny_bank();
  doc["questions"] = json::array();
  CHECK(code_of(doc) == ErrorCode::ValidationError);

  doc = tiny_bank();
  doc["questions"][0]["attribute"] = "PA3.1";
  CHECK(code_of(doc, &path) == ErrorCode::ValidationError);
  CHECK(path == "questions[0].scope");

  doc = tiny_bank();
  doc["questions"][0]["scope"] = "generic";
  CHECK(code_of(doc, &path) == ErrorCode::ValidationError);

  doc = tiny_bank();
  doc["questions"][0]["knowledge_item"] = "K9";
  CHECK(code_of(doc, &path) == ErrorCode::ValidationError);
  CHECK(path == "questions[0].knowledge_item");

  doc = tiny_bank();
  doc["questions"][0]["scope"]["process"] = "XYZ";
  CHECK(code_of(doc, &path) == ErrorCode::ValidationError);

  doc = tiny_bank();
  doc["questions"].push_back(doc["questions"][0]);
  CHECK(code_of(doc, &path) == ErrorCode::ValidationError);
  CHECK(path == "questions[1].id");

  doc = tiny_bank();
  doc["questions"][0]["roles"] = json::array({"Auditor"});
  CHECK(code_of(doc, &path) != ErrorCode::IoError);
  CHECK(path.rfind("questions[0].roles", 0) == 0);

  doc = tiny_bank();
  doc["schema_version"] = 2;
  CHECK(code_of(doc) == ErrorCode::VersionError);

  doc = tiny_bank();
  doc.erase("processes");
  CHECK(code_of(doc) == ErrorCode::ParseError);

  std::istringstream broken("{not json");
  CHECK_THROWS_AS(ContentBank::load(broken), Error);
}

TEST_CASE("questions_for matches a filter oracle") {
  const auto& bank = *testing::sample_bank();
  const auto raw = raw_sample();
  for (const auto& process : {"SLM", "CHG", "PRB", "CFG"}) {
    for (auto role : kAllRoles) {
      for (int level = 0; level <= 5; ++level) {
        std::set<std::string> expected;
        for (const auto& q : raw["questions"]) {
          const auto attribute = *parse_attribute(q["attribute"].get<std::string>());
          const bool scoped = q["scope"].is_string() || q["scope"]["process"] == process;
          bool has_role = false;
          for (const auto& r : q["roles"]) has_role |= r == to_string(role);
          if (scoped && has_role && to_int(level_of(attribute)) <= level) {
            expected.insert(q["id"].get<std::string>());
          }
        }
        std::set<std::string> actual;
        for (const auto* q : questions_for(bank, process, role, capability_level_from_int(level))) {
          actual.insert(q->id);
        }
        CHECK(actual == expected);
      }
    }
  }
}

TEST_CASE("questions_for examples") {
  const auto& bank = *testing::sample_bank();
  const auto prb = questions_for(bank, "PRB", Role::ProcessPerformer, CapabilityLevel::CL5);
  for (const auto* q : prb) {
    CHECK(q->has_role(Role::ProcessPerformer));
    CHECK(q->applies_to("PRB"));
  }
  for (const auto* q : questions_for(bank, "PRB", Role::ProcessManager, CapabilityLevel::CL1)) {
    CHECK(q->attribute == ProcessAttribute::PA1_1);
    CHECK(q->process == "PRB");
  }
  CHECK_THROWS_AS(questions_for(bank, "NOPE", Role::ProcessManager, CapabilityLevel::CL5), Error);

  auto doc = tiny_bank();
  const auto tiny = ContentBank::from_json(doc);
  CHECK(questions_for(tiny, "PRB", Role::ExternalStakeholder, CapabilityLevel::CL5).empty());
}
