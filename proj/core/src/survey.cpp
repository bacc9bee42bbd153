#include "smpa/survey.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"
#include "smpa/crypto.hpp"

namespace smpa {

using detail::json;

namespace {

constexpr std::array<std::string_view, 4> kStateNames = {"Draft", "Open", "Closed", "Reported"};

[[noreturn]] void invalid_state(const Assessment& a, std::string_view action) {
  throw Error(ErrorCode::InvalidState,
              fmt::format("cannot {} assessment '{}' in state {}", action, a.id,
                          to_string(a.state)));
}

double fraction(std::size_t answered, std::size_t allocated) {
  return allocated == 0 ? 0.0 : static_cast<double>(answered) / static_cast<double>(allocated);
}

std::size_t count_answers(const Assessment& a, const std::string& participant,
                          const std::string& process) {
  auto it = a.responses.lower_bound(ResponseKey{participant, process, ""});
  std::size_t n = 0;
  for (; it != a.responses.end() && it->first.participant == participant &&
         it->first.process == process;
       ++it) {
    ++n;
  }
  return n;
}

}  // namespace

std::string_view to_string(AssessmentState state) noexcept {
  return kStateNames[static_cast<std::size_t>(state)];
}

std::optional<AssessmentState> parse_assessment_state(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == text) {
      return static_cast<AssessmentState>(i);
    }
  }
  return std::nullopt;
}

std::optional<Role> Participant::role_for(std::string_view process) const {
  for (const auto& a : assignments) {
    if (a.process == process) {
      return a.role;
    }
  }
  return std::nullopt;
}

const Participant* Assessment::find_participant(std::string_view participant_id) const {
  for (const auto& p : participants) {
    if (p.id == participant_id) {
      return &p;
    }
  }
  return nullptr;
}

bool Assessment::assesses(std::string_view process) const {
  return std::find(processes.begin(), processes.end(), process) != processes.end();
}

void require_same_bank(const Assessment& assessment, const ContentBank& bank) {
  if (assessment.bank_fingerprint != bank.fingerprint()) {
    throw Error(ErrorCode::BankMismatch,
                fmt::format("assessment '{}' was created against bank {}, active bank is {}",
                            assessment.id, assessment.bank_fingerprint, bank.fingerprint()));
  }
}

Assessment create_assessment(const ContentBank& bank, std::string id, std::string org_profile,
                             std::vector<std::string> processes, CapabilityLevel target_level,
                             std::string now) {
  if (id.empty()) {
    throw Error(ErrorCode::ValidationError, "assessment id is empty", "id");
  }
  if (processes.empty()) {
    throw Error(ErrorCode::EmptyProcessList, "an assessment needs at least one process",
                "processes");
  }
  if (target_level == CapabilityLevel::CL0) {
    throw Error(ErrorCode::OutOfRange, "target level must be at least CL1", "target_level");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < processes.size(); ++i) {
    if (bank.find_process(processes[i]) == nullptr) {
      throw Error(ErrorCode::UnknownProcess, fmt::format("unknown process '{}'", processes[i]),
                  detail::index_path("processes", i));
    }
    if (!seen.insert(processes[i]).second) {
      throw Error(ErrorCode::ValidationError,
                  fmt::format("process '{}' listed twice", processes[i]),
                  detail::index_path("processes", i));
    }
  }
  Assessment a;
  a.id = std::move(id);
  a.org_profile = std::move(org_profile);
  a.processes = std::move(processes);
  a.target_level = target_level;
  a.bank_fingerprint = bank.fingerprint();
  a.created_at = std::move(now);
  return a;
}

const Participant& register_participant(Assessment& assessment, const ContentBank& bank,
                                        std::string display_name,
                                        std::vector<Assignment> assignments,
                                        std::string token_hash) {
  require_same_bank(assessment, bank);
  if (assessment.state != AssessmentState::Draft && assessment.state != AssessmentState::Open) {
    invalid_state(assessment, "register participants for");
  }
  if (display_name.empty()) {
    throw Error(ErrorCode::ValidationError, "display name is empty", "display_name");
  }
  if (assignments.empty()) {
    throw Error(ErrorCode::ValidationError, "a participant needs at least one assignment",
                "assignments");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto& process = assignments[i].process;
    if (!assessment.assesses(process)) {
      throw Error(ErrorCode::UnknownProcess,
                  fmt::format("process '{}' is not part of assessment '{}'", process,
                              assessment.id),
                  detail::index_path("assignments", i));
    }
    if (!seen.insert(process).second) {
      throw Error(ErrorCode::DuplicateRoleForProcess,
                  fmt::format("participant already holds a role for '{}'", process),
                  detail::index_path("assignments", i));
    }
  }
  if (token_hash.empty()) {
    throw Error(ErrorCode::ValidationError, "token hash is empty", "token_hash");
  }

  Participant p;
  p.id = fmt::format("p{:03}", assessment.participants.size() + 1);
  p.display_name = std::move(display_name);
  p.token_hash = std::move(token_hash);
  p.assignments = std::move(assignments);
  assessment.participants.push_back(std::move(p));
  return assessment.participants.back();
}

void open_assessment(Assessment& assessment, std::string now) {
  if (assessment.state != AssessmentState::Draft) {
    invalid_state(assessment, "open");
  }
  assessment.state = AssessmentState::Open;
  assessment.opened_at = std::move(now);
}

void close_assessment(Assessment& assessment, std::string now) {
  if (assessment.state != AssessmentState::Open) {
    invalid_state(assessment, "close");
  }
  assessment.state = AssessmentState::Closed;
  assessment.closed_at = std::move(now);
}

void mark_reported(Assessment& assessment, std::string now) {
  if (assessment.state == AssessmentState::Reported) {
    return;
  }
  if (assessment.state != AssessmentState::Closed) {
    invalid_state(assessment, "report on");
  }
  assessment.state = AssessmentState::Reported;
  assessment.reported_at = std::move(now);
}

const Participant& authenticate(const Assessment& assessment, std::string_view token) {
  if (!token.empty()) {
    const auto hash = sha256_hex(token);
    for (const auto& p : assessment.participants) {
      if (constant_time_equal(p.token_hash, hash)) {
        return p;
      }
    }
  }
  throw Error(ErrorCode::AuthError, "invalid participant token");
}

std::vector<AllocatedQuestion> allocate_questionnaire(const Assessment& assessment,
                                                      const ContentBank& bank,
                                                      std::string_view participant_id) {
  const auto* participant = assessment.find_participant(participant_id);
  if (participant == nullptr) {
    throw Error(ErrorCode::UnknownParticipant,
                fmt::format("unknown participant '{}'", participant_id));
  }
  std::vector<AllocatedQuestion> out;
  for (const auto& process : assessment.processes) {
    auto role = participant->role_for(process);
    if (!role) {
      continue;
    }
    for (const auto* q : questions_for(bank, process, *role, assessment.target_level)) {
      out.push_back(AllocatedQuestion{process, q});
    }
  }
  return out;
}

bool is_allocated(const Assessment& assessment, const ContentBank& bank,
                  const Participant& participant, std::string_view process,
                  std::string_view question) {
  auto role = participant.role_for(process);
  if (!role) {
    return false;
  }
  const auto* q = bank.find_question(question);
  return q != nullptr && q->applies_to(process) && q->has_role(*role) &&
         level_of(q->attribute) <= assessment.target_level;
}

bool submit_response(Assessment& assessment, const ContentBank& bank,
                     std::string_view participant_id, std::string_view process,
                     std::string_view question, AnswerOption answer, std::string now) {
  require_same_bank(assessment, bank);
  if (assessment.state != AssessmentState::Open) {
    invalid_state(assessment, "submit responses to");
  }
  const auto* participant = assessment.find_participant(participant_id);
  if (participant == nullptr) {
    throw Error(ErrorCode::UnknownParticipant,
                fmt::format("unknown participant '{}'", participant_id));
  }
  if (!is_allocated(assessment, bank, *participant, process, question)) {
    throw Error(ErrorCode::NotAllocated,
                fmt::format("question '{}' for process '{}' is not allocated to participant '{}'",
                            question, process, participant_id));
  }
  ResponseKey key{std::string(participant_id), std::string(process), std::string(question)};
  Response response{key.participant, key.question, key.process, answer, std::move(now)};
  auto [it, inserted] = assessment.responses.insert_or_assign(std::move(key), std::move(response));
  return inserted;
}

ProgressSnapshot progress(const Assessment& assessment, const ContentBank& bank) {
  ProgressSnapshot snap;
  snap.assessment = assessment.id;
  snap.state = assessment.state;
  for (const auto& process : assessment.processes) {
    snap.processes.push_back(ProcessProgress{process});
  }
  for (const auto& participant : assessment.participants) {
    ParticipantProgress pp;
    pp.participant = participant.id;
    pp.display_name = participant.display_name;
    for (std::size_t i = 0; i < assessment.processes.size(); ++i) {
      const auto& process = assessment.processes[i];
      auto role = participant.role_for(process);
      if (!role) {
        continue;
      }
      ProcessProgress proc{process};
      proc.allocated = questions_for(bank, process, *role, assessment.target_level).size();
      proc.answered = count_answers(assessment, participant.id, process);
      proc.completion = fraction(proc.answered, proc.allocated);
      pp.allocated += proc.allocated;
      pp.answered += proc.answered;
      snap.processes[i].allocated += proc.allocated;
      snap.processes[i].answered += proc.answered;
      pp.processes.push_back(std::move(proc));
    }
    pp.completion = fraction(pp.answered, pp.allocated);
    pp.zero_allocation = pp.allocated == 0;
    snap.allocated += pp.allocated;
    snap.answered += pp.answered;
    snap.participants.push_back(std::move(pp));
  }
  for (auto& proc : snap.processes) {
    proc.completion = fraction(proc.answered, proc.allocated);
  }
  snap.completion = fraction(snap.answered, snap.allocated);
  return snap;
}

std::vector<Response> response_list(const Assessment& assessment) {
  std::vector<Response> out;
  out.reserve(assessment.responses.size());
  for (const auto& [_, r] : assessment.responses) {
    out.push_back(r);
  }
  return out;
}

namespace {

json optional_string(const std::optional<std::string>& value) {
  return value ? json(*value) : json(nullptr);
}

json assignments_to_json(const std::vector<Assignment>& assignments) {
  json out = json::array();
  for (const auto& a : assignments) {
    out.push_back({{"process", a.process}, {"role", to_string(a.role)}});
  }
  return out;
}

std::vector<Assignment> assignments_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) {
    throw Error(ErrorCode::ParseError, "expected an array", path);
  }
  std::vector<Assignment> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = detail::index_path(path, i);
    detail::require_object(j[i], p);
    auto role_text = detail::get_string(j[i], "role", p);
    auto role = parse_role(role_text);
    if (!role) {
      throw Error(ErrorCode::ValidationError, fmt::format("unknown role '{}'", role_text),
                  detail::child_path(p, "role"));
    }
    out.push_back(Assignment{detail::get_string(j[i], "process", p), *role});
  }
  return out;
}

}  // namespace

json assessment_to_json(const Assessment& a) {
  json participants = json::array();
  for (const auto& p : a.participants) {
    participants.push_back({{"id", p.id},
                            {"display_name", p.display_name},
                            {"token_hash", p.token_hash},
                            {"assignments", assignments_to_json(p.assignments)}});
  }
  json responses = json::array();
  for (const auto& [_, r] : a.responses) {
    responses.push_back({{"participant", r.participant},
                         {"process", r.process},
                         {"question", r.question},
                         {"answer", to_string(r.answer)},
                         {"submitted_at", r.submitted_at}});
  }
  return json{{"id", a.id},
              {"org_profile", a.org_profile},
              {"processes", a.processes},
              {"target_level", to_int(a.target_level)},
              {"bank_fingerprint", a.bank_fingerprint},
              {"state", to_string(a.state)},
              {"created_at", a.created_at},
              {"opened_at", optional_string(a.opened_at)},
              {"closed_at", optional_string(a.closed_at)},
              {"reported_at", optional_string(a.reported_at)},
              {"participants", std::move(participants)},
              {"responses", std::move(responses)}};
}

Assessment assessment_from_json(const json& j) {
  detail::require_object(j, "");
  Assessment a;
  a.id = detail::get_string(j, "id", "");
  a.org_profile = detail::get_string(j, "org_profile", "");
  const auto& processes = detail::require_array(j, "processes", "");
  for (std::size_t i = 0; i < processes.size(); ++i) {
    if (!processes[i].is_string()) {
      throw Error(ErrorCode::ParseError, "expected a string", detail::index_path("processes", i));
    }
    a.processes.push_back(processes[i].get<std::string>());
  }
  a.target_level = capability_level_from_int(static_cast<int>(detail::get_int(j, "target_level", "")));
  a.bank_fingerprint = detail::get_string(j, "bank_fingerprint", "");
  auto state_text = detail::get_string(j, "state", "");
  auto state = parse_assessment_state(state_text);
  if (!state) {
    throw Error(ErrorCode::ParseError, fmt::format("unknown state '{}'", state_text), "state");
  }
  a.state = *state;
  a.created_at = detail::get_string(j, "created_at", "");
  a.opened_at = detail::get_optional_string(j, "opened_at", "");
  a.closed_at = detail::get_optional_string(j, "closed_at", "");
  a.reported_at = detail::get_optional_string(j, "reported_at", "");

  const auto& participants = detail::require_array(j, "participants", "");
  for (std::size_t i = 0; i < participants.size(); ++i) {
    const auto path = detail::index_path("participants", i);
    detail::require_object(participants[i], path);
    a.participants.push_back(Participant{
        detail::get_string(participants[i], "id", path),
        detail::get_string(participants[i], "display_name", path),
        detail::get_string(participants[i], "token_hash", path),
        assignments_from_json(detail::require_field(participants[i], "assignments", path),
                              detail::child_path(path, "assignments"))});
  }
  const auto& responses = detail::require_array(j, "responses", "");
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto path = detail::index_path("responses", i);
    detail::require_object(responses[i], path);
    Response r;
    r.participant = detail::get_string(responses[i], "participant", path);
    r.process = detail::get_string(responses[i], "process", path);
    r.question = detail::get_string(responses[i], "question", path);
    auto answer_text = detail::get_string(responses[i], "answer", path);
    auto answer = parse_answer(answer_text);
    if (!answer) {
      throw Error(ErrorCode::ParseError, fmt::format("unknown answer '{}'", answer_text),
                  detail::child_path(path, "answer"));
    }
    r.answer = *answer;
    r.submitted_at = detail::get_string(responses[i], "submitted_at", path);
    ResponseKey key{r.participant, r.process, r.question};
    if (!a.responses.emplace(std::move(key), std::move(r)).second) {
      throw Error(ErrorCode::ValidationError, "duplicate response", path);
    }
  }
  return a;
}

void validate_assessment(const Assessment& a, const ContentBank& bank) {
  auto fail = [&a](std::string message, std::string path = {}) {
    throw Error(ErrorCode::ValidationError, fmt::format("assessment '{}': {}", a.id, message),
                std::move(path));
  };
  require_same_bank(a, bank);
  if (a.id.empty()) fail("empty id", "id");
  if (a.processes.empty()) fail("no processes", "processes");
  if (a.target_level == CapabilityLevel::CL0) fail("target level CL0", "target_level");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < a.processes.size(); ++i) {
    if (bank.find_process(a.processes[i]) == nullptr || !seen.insert(a.processes[i]).second) {
      fail(fmt::format("invalid process '{}'", a.processes[i]), detail::index_path("processes", i));
    }
  }
  const auto rank = static_cast<int>(a.state);
  if (a.opened_at.has_value() != (rank >= static_cast<int>(AssessmentState::Open))) {
    fail("opened_at inconsistent with state", "opened_at");
  }
  if (a.closed_at.has_value() != (rank >= static_cast<int>(AssessmentState::Closed))) {
    fail("closed_at inconsistent with state", "closed_at");
  }
  if (a.reported_at.has_value() != (a.state == AssessmentState::Reported)) {
    fail("reported_at inconsistent with state", "reported_at");
  }
  for (std::size_t i = 0; i < a.participants.size(); ++i) {
    const auto& p = a.participants[i];
    const auto path = detail::index_path("participants", i);
    if (p.id != fmt::format("p{:03}", i + 1)) fail("participant ids out of sequence", path);
    if (p.display_name.empty() || p.token_hash.empty() || p.assignments.empty()) {
      fail("incomplete participant", path);
    }
    std::set<std::string> assigned;
    for (const auto& as : p.assignments) {
      if (!a.assesses(as.process) || !assigned.insert(as.process).second) {
        fail(fmt::format("invalid assignment for '{}'", as.process), path);
      }
    }
  }
  if (!a.responses.empty() && a.state == AssessmentState::Draft) {
    fail("responses recorded on a draft assessment", "responses");
  }
  for (const auto& [key, r] : a.responses) {
    const auto* p = a.find_participant(r.participant);
    if (p == nullptr || key.participant != r.participant || key.process != r.process ||
        key.question != r.question || !is_allocated(a, bank, *p, r.process, r.question)) {
      fail(fmt::format("response {}/{}/{} is not allocated", r.participant, r.process, r.question),
           "responses");
    }
  }
}

json assessment_summary_json(const Assessment& a) {
  json participants = json::array();
  for (const auto& p : a.participants) {
    participants.push_back({{"id", p.id},
                            {"display_name", p.display_name},
                            {"assignments", assignments_to_json(p.assignments)}});
  }
  return json{{"id", a.id},
              {"org_profile", a.org_profile},
              {"processes", a.processes},
              {"target_level", to_int(a.target_level)},
              {"bank_fingerprint", a.bank_fingerprint},
              {"state", to_string(a.state)},
              {"created_at", a.created_at},
              {"opened_at", optional_string(a.opened_at)},
              {"closed_at", optional_string(a.closed_at)},
              {"reported_at", optional_string(a.reported_at)},
              {"participants", std::move(participants)},
              {"response_count", a.responses.size()}};
}

namespace {

json process_progress_json(const ProcessProgress& p) {
  return json{{"process", p.process},
              {"allocated", p.allocated},
              {"answered", p.answered},
              {"completion", p.completion}};
}

}  // namespace

json to_json(const ParticipantProgress& pp) {
  json processes = json::array();
  for (const auto& p : pp.processes) {
    processes.push_back(process_progress_json(p));
  }
  return json{{"participant", pp.participant},
              {"display_name", pp.display_name},
              {"allocated", pp.allocated},
              {"answered", pp.answered},
              {"completion", pp.completion},
              {"zero_allocation", pp.zero_allocation},
              {"processes", std::move(processes)}};
}

json to_json(const ProgressSnapshot& snap) {
  json participants = json::array();
  for (const auto& pp : snap.participants) {
    participants.push_back(to_json(pp));
  }
  json processes = json::array();
  for (const auto& p : snap.processes) {
    processes.push_back(process_progress_json(p));
  }
  return json{{"assessment", snap.assessment},
              {"state", to_string(snap.state)},
              {"allocated", snap.allocated},
              {"answered", snap.answered},
              {"completion", snap.completion},
              {"participants", std::move(participants)},
              {"processes", std::move(processes)}};
}

json questionnaire_to_json(const std::vector<AllocatedQuestion>& allocation) {
  json sections = json::array();
  for (const auto& item : allocation) {
    if (sections.empty() || sections.back()["process"] != item.process) {
      sections.push_back({{"process", item.process}, {"questions", json::array()}});
    }
    json q = {{"id", item.question->id},
              {"attribute", to_string(item.question->attribute)},
              {"text", item.question->text}};
    sections.back()["questions"].push_back(std::move(q));
  }
  return sections;
}

}  // namespace smpa
