#pragma once

// Phase 2: assessment lifecycle, participants, questionnaire allocation,
// response capture and participation monitoring.
//
// State machine: Draft -> Open -> Closed -> Reported, each transition at
// most once. Every mutating function validates fully before touching the
// assessment, so a thrown Error leaves it unchanged.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "smpa/bank.hpp"
#include "smpa/model.hpp"

namespace smpa {

enum class AssessmentState { Draft, Open, Closed, Reported };

std::string_view to_string(AssessmentState state) noexcept;
std::optional<AssessmentState> parse_assessment_state(std::string_view text) noexcept;

struct Assignment {
  std::string process;
  Role role = Role::ProcessPerformer;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Participant {
  std::string id;
  std::string display_name;
  std::string token_hash;  // sha256 of the access token; the token itself is never kept
  std::vector<Assignment> assignments;

  std::optional<Role> role_for(std::string_view process) const;

  friend bool operator==(const Participant&, const Participant&) = default;
};

struct Response {
  std::string participant;
  std::string question;
  std::string process;
  AnswerOption answer = AnswerOption::Unable;
  std::string submitted_at;

  friend bool operator==(const Response&, const Response&) = default;
};

struct ResponseKey {
  std::string participant;
  std::string process;
  std::string question;

  friend auto operator<=>(const ResponseKey&, const ResponseKey&) = default;
};

struct Assessment {
  std::string id;
  std::string org_profile;
  std::vector<std::string> processes;
  CapabilityLevel target_level = CapabilityLevel::CL5;
  std::string bank_fingerprint;
  AssessmentState state = AssessmentState::Draft;
  std::string created_at;
  std::optional<std::string> opened_at;
  std::optional<std::string> closed_at;
  std::optional<std::string> reported_at;
  std::vector<Participant> participants;
  std::map<ResponseKey, Response> responses;

  const Participant* find_participant(std::string_view participant_id) const;
  bool assesses(std::string_view process) const;

  friend bool operator==(const Assessment&, const Assessment&) = default;
};

// Throws Error{BankMismatch} when the assessment was created against a
// different bank.
void require_same_bank(const Assessment& assessment, const ContentBank& bank);

Assessment create_assessment(const ContentBank& bank, std::string id, std::string org_profile,
                             std::vector<std::string> processes, CapabilityLevel target_level,
                             std::string now);

// Assigns the next sequential participant id (p001, p002, ...).
const Participant& register_participant(Assessment& assessment, const ContentBank& bank,
                                        std::string display_name,
                                        std::vector<Assignment> assignments,
                                        std::string token_hash);

void open_assessment(Assessment& assessment, std::string now);
void close_assessment(Assessment& assessment, std::string now);
// Closed -> Reported; a no-op on an already Reported assessment.
void mark_reported(Assessment& assessment, std::string now);

// Resolves an access token to its participant. Throws Error{AuthError}.
const Participant& authenticate(const Assessment& assessment, std::string_view token);

struct AllocatedQuestion {
  std::string process;
  const Question* question = nullptr;
};

// Per-process sections in assessment process order; within a section,
// exactly questions_for(bank, process, role, target_level).
std::vector<AllocatedQuestion> allocate_questionnaire(const Assessment& assessment,
                                                      const ContentBank& bank,
                                                      std::string_view participant_id);

bool is_allocated(const Assessment& assessment, const ContentBank& bank,
                  const Participant& participant, std::string_view process,
                  std::string_view question);

// Upserts the participant's answer. Returns true when this was the first
// answer for (participant, process, question).
bool submit_response(Assessment& assessment, const ContentBank& bank,
                     std::string_view participant_id, std::string_view process,
                     std::string_view question, AnswerOption answer, std::string now);

struct ProcessProgress {
  std::string process;
  std::size_t allocated = 0;
  std::size_t answered = 0;
  double completion = 0.0;
};

struct ParticipantProgress {
  std::string participant;
  std::string display_name;
  std::vector<ProcessProgress> processes;
  std::size_t allocated = 0;
  std::size_t answered = 0;
  double completion = 0.0;
  bool zero_allocation = false;
};

struct ProgressSnapshot {
  std::string assessment;
  AssessmentState state = AssessmentState::Draft;
  std::vector<ParticipantProgress> participants;
  std::vector<ProcessProgress> processes;  // summed over participants
  std::size_t allocated = 0;
  std::size_t answered = 0;
  double completion = 0.0;
};

ProgressSnapshot progress(const Assessment& assessment, const ContentBank& bank);

// Responses in (participant, process, question) order.
std::vector<Response> response_list(const Assessment& assessment);

// Full persisted form, including token hashes and responses.
nlohmann::json assessment_to_json(const Assessment& assessment);
// Structural parse only; domain re-validation is the store's job.
Assessment assessment_from_json(const nlohmann::json& document);

// Re-checks every domain invariant of a loaded assessment against `bank`:
// state/timestamp consistency, participant ids and assignments, and that
// each response is allocated. Throws Error{ValidationError|BankMismatch}.
void validate_assessment(const Assessment& assessment, const ContentBank& bank);

// Facilitator-facing view: metadata and participants without secrets or
// answers.
nlohmann::json assessment_summary_json(const Assessment& assessment);

nlohmann::json to_json(const ProgressSnapshot& snapshot);
nlohmann::json to_json(const ParticipantProgress& progress);

nlohmann::json questionnaire_to_json(const std::vector<AllocatedQuestion>& allocation);

}  // namespace smpa
