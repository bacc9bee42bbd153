#pragma once

// Scripted respondent populations for tests and demos. Not a model of real
// respondent behaviour.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "smpa/bank.hpp"
#include "smpa/survey.hpp"

namespace smpa {

// Probabilities over N, P, L, F, Unable; must sum to 1 within 1e-9.
struct AnswerDistribution {
  std::array<double, 5> weights{0.0, 0.0, 0.0, 1.0, 0.0};

  void validate(const std::string& path) const;
};

// Applies to responses matching every field that is set.
struct DistributionRule {
  std::optional<std::string> process;
  std::optional<ProcessAttribute> attribute;
  std::optional<Role> role;
  AnswerDistribution distribution;
};

struct RosterEntry {
  std::string display_name;
  std::vector<Assignment> assignments;
};

struct SimulationProfile {
  std::vector<RosterEntry> roster;
  AnswerDistribution default_distribution;
  std::vector<DistributionRule> rules;  // last matching rule wins
  std::uint64_t seed = 0;
};

SimulationProfile parse_simulation_profile(const nlohmann::json& document);

struct SimulatedResponse {
  std::string participant;  // participant id in the assessment
  std::string process;
  std::string question;
  AnswerOption answer = AnswerOption::Unable;

  friend bool operator==(const SimulatedResponse&, const SimulatedResponse&) = default;
};

// Answers every allocated question of each roster participant. Roster
// entries are matched to `participant_ids` by position. Deterministic for a
// fixed seed on every platform (mt19937_64 plus an explicit inverse-CDF).
std::vector<SimulatedResponse> simulate_responses(const Assessment& assessment,
                                                  const ContentBank& bank,
                                                  const SimulationProfile& profile,
                                                  const std::vector<std::string>& participant_ids,
                                                  std::uint64_t seed);

// Bulk response document: {"responses": [{participant, process, question, answer}]}
nlohmann::json responses_to_json(const std::vector<SimulatedResponse>& responses);
std::vector<SimulatedResponse> responses_from_json(const nlohmann::json& document);

}  // namespace smpa
