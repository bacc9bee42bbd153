#include "smpa/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json_util.hpp"
#include "smpa/crypto.hpp"

namespace smpa {

using detail::json;

namespace {

constexpr std::uint64_t kCompactEvery = 1000;

[[noreturn]] void io_failure(std::string_view what, const std::filesystem::path& path) {
  throw Error(ErrorCode::IoError,
              fmt::format("{} '{}': {}", what, path.string(), std::strerror(errno)));
}

void write_all(int fd, std::string_view data, const std::filesystem::path& path) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("write failed for", path);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void fsync_directory(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) {
    io_failure("cannot open directory", dir);
  }
  ::fsync(fd);
  ::close(fd);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot read '{}'", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string event_assessment(const json& event) { return detail::get_string(event, "assessment", "event"); }

std::vector<Assignment> assignments_from(const json& list) {
  std::vector<Assignment> out;
  for (const auto& a : list) {
    auto role = parse_role(detail::get_string(a, "role", "event.assignments"));
    if (!role) {
      throw Error(ErrorCode::ValidationError, "unknown role", "event.assignments");
    }
    out.push_back(Assignment{detail::get_string(a, "process", "event.assignments"), *role});
  }
  return out;
}

json assignments_json(const std::vector<Assignment>& assignments) {
  json out = json::array();
  for (const auto& a : assignments) {
    out.push_back({{"process", a.process}, {"role", to_string(a.role)}});
  }
  return out;
}

}  // namespace

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  const int fd = ::open(tmp.c_str(), O_CREAT | O_TRUNC | O_WRONLY | O_CLOEXEC, 0644);
  if (fd < 0) {
    io_failure("cannot create", tmp);
  }
  try {
    write_all(fd, contents, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_failure("fsync failed for", tmp);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    io_failure("cannot rename onto", path);
  }
  fsync_directory(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

Store::Store(std::filesystem::path data_dir, std::shared_ptr<const ContentBank> bank, Clock clock)
    : data_dir_(std::move(data_dir)), bank_(std::move(bank)), clock_(std::move(clock)) {
  std::error_code ec;
  std::filesystem::create_directories(data_dir_ / "reports", ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
                fmt::format("cannot create data directory '{}': {}", data_dir_.string(),
                            ec.message()));
  }
  const auto lock_path = data_dir_ / "LOCK";
  lock_fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) {
    io_failure("cannot open lock file", lock_path);
  }
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorCode::StoreLocked,
                fmt::format("data directory '{}' is in use by another process", data_dir_.string()));
  }
  try {
    load();
  } catch (...) {
    if (journal_fd_ >= 0) ::close(journal_fd_);
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
    throw;
  }
}

Store::~Store() {
  try {
    std::unique_lock lock(mutex_);
    if (journal_events_ > 0) {
      compact_locked();
    }
  } catch (...) {
    // the journal still holds everything
  }
  if (journal_fd_ >= 0) ::close(journal_fd_);
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void Store::load() {
  const auto snapshot_path = data_dir_ / "state.json";
  if (std::filesystem::exists(snapshot_path)) {
    const auto doc = detail::parse_document(read_file(snapshot_path));
    detail::require_object(doc, "state");
    if (detail::get_int(doc, "schema_version", "state") != kStoreSchemaVersion) {
      throw Error(ErrorCode::VersionError, "unsupported store schema_version",
                  "state.schema_version");
    }
    seq_ = static_cast<std::uint64_t>(detail::get_int(doc, "seq", "state"));
    for (const auto& a : detail::require_array(doc, "assessments", "state")) {
      auto assessment = assessment_from_json(a);
      validate_assessment(assessment, *bank_);
      auto id = assessment.id;
      assessments_.emplace(std::move(id), std::move(assessment));
    }
  }

  const auto journal_path = data_dir_ / "journal.log";
  if (std::filesystem::exists(journal_path)) {
    const auto text = read_file(journal_path);
    std::size_t pos = 0;
    std::uint64_t line_number = 0;
    while (pos < text.size()) {
      const auto end = text.find('\n', pos);
      if (end == std::string::npos) {
        // Unterminated tail: the write never completed, so it was never
        // acknowledged. Drop it.
        std::filesystem::resize_file(journal_path, pos);
        break;
      }
      ++line_number;
      const auto line = std::string_view(text).substr(pos, end - pos);
      json event;
      try {
        event = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("corrupt journal line {}: {}", line_number, e.what()),
                    journal_path.string());
      }
      replay_line(event, line_number);
      pos = end + 1;
    }
  }

  journal_fd_ = ::open(journal_path.c_str(), O_CREAT | O_WRONLY | O_APPEND | O_CLOEXEC, 0644);
  if (journal_fd_ < 0) {
    io_failure("cannot open journal", journal_path);
  }

  for (const auto& [id, a] : assessments_) {
    for (const auto& p : a.participants) {
      token_index_[p.token_hash] = TokenOwner{id, p.id};
    }
  }
  if (journal_events_ > 0) {
    compact_locked();
  }
}

void Store::replay_line(const json& event, std::uint64_t line_number) {
  const auto seq = static_cast<std::uint64_t>(detail::get_int(event, "seq", "event"));
  if (seq <= seq_) {
    return;  // already folded into the snapshot
  }
  if (seq != seq_ + 1) {
    throw Error(ErrorCode::ValidationError,
                fmt::format("journal line {} has seq {}, expected {}", line_number, seq, seq_ + 1));
  }
  try {
    apply(assessments_, event);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("journal line {}: {}", line_number, e.message()), e.path());
  }
  seq_ = seq;
  ++journal_events_;
}

void Store::apply(std::map<std::string, Assessment>& assessments, const json& event) const {
  const auto op = detail::get_string(event, "op", "event");
  const auto at = detail::get_string(event, "at", "event");

  if (op == "create") {
    std::vector<std::string> processes;
    for (const auto& p : detail::require_array(event, "processes", "event")) {
      processes.push_back(p.get<std::string>());
    }
    auto a = create_assessment(
        *bank_, detail::get_string(event, "assessment", "event"),
        detail::get_string(event, "org_profile", "event"), std::move(processes),
        capability_level_from_int(static_cast<int>(detail::get_int(event, "target_level", "event"))),
        at);
    if (assessments.contains(a.id)) {
      throw Error(ErrorCode::ValidationError, fmt::format("assessment '{}' already exists", a.id));
    }
    auto id = a.id;
    assessments.emplace(std::move(id), std::move(a));
    return;
  }

  auto it = assessments.find(event_assessment(event));
  if (it == assessments.end()) {
    throw Error(ErrorCode::UnknownAssessment,
                fmt::format("unknown assessment '{}'", event_assessment(event)));
  }
  auto& a = it->second;
  if (op == "register") {
    const auto& p = smpa::register_participant(
        a, *bank_, detail::get_string(event, "display_name", "event"),
        assignments_from(detail::require_array(event, "assignments", "event")),
        detail::get_string(event, "token_hash", "event"));
    if (p.id != detail::get_string(event, "participant", "event")) {
      throw Error(ErrorCode::ValidationError, "participant id does not replay");
    }
  } else if (op == "open") {
    open_assessment(a, at);
  } else if (op == "close") {
    close_assessment(a, at);
  } else if (op == "reported") {
    mark_reported(a, at);
  } else if (op == "respond") {
    auto answer = parse_answer(detail::get_string(event, "answer", "event"));
    if (!answer) {
      throw Error(ErrorCode::ValidationError, "unknown answer", "event.answer");
    }
    submit_response(a, *bank_, detail::get_string(event, "participant", "event"),
                    detail::get_string(event, "process", "event"),
                    detail::get_string(event, "question", "event"), *answer, at);
  } else {
    throw Error(ErrorCode::ValidationError, fmt::format("unknown journal op '{}'", op));
  }
}

void Store::commit(json event) {
  event["seq"] = seq_ + 1;
  std::map<std::string, Assessment> scratch;
  const auto id = event_assessment(event);
  if (event["op"] != "create") {
    scratch.emplace(id, find_locked(id));
  } else if (assessments_.contains(id)) {
    throw Error(ErrorCode::ValidationError, fmt::format("assessment '{}' already exists", id));
  }
  apply(scratch, event);
  append_journal(event.dump() + "\n");
  for (auto& [key, value] : scratch) {
    assessments_[key] = std::move(value);
  }
  ++seq_;
  if (++journal_events_ >= kCompactEvery) {
    compact_locked();
  }
}

void Store::append_journal(const std::string& line) {
  const auto path = data_dir_ / "journal.log";
  write_all(journal_fd_, line, path);
  if (::fdatasync(journal_fd_) != 0) {
    io_failure("fdatasync failed for", path);
  }
}

void Store::compact() {
  std::unique_lock lock(mutex_);
  compact_locked();
}

void Store::compact_locked() {
  json assessments = json::array();
  for (const auto& [_, a] : assessments_) {
    assessments.push_back(assessment_to_json(a));
  }
  json doc = {{"schema_version", kStoreSchemaVersion},
              {"seq", seq_},
              {"bank_fingerprint", bank_->fingerprint()},
              {"assessments", std::move(assessments)}};
  write_file_atomic(data_dir_ / "state.json", doc.dump());
  // A crash here leaves journal events with seq <= snapshot seq; replay skips them.
  if (::ftruncate(journal_fd_, 0) != 0 || ::fsync(journal_fd_) != 0) {
    io_failure("cannot truncate journal", data_dir_ / "journal.log");
  }
  journal_events_ = 0;
}

const Assessment& Store::find_locked(std::string_view id) const {
  auto it = assessments_.find(std::string(id));
  if (it == assessments_.end()) {
    throw Error(ErrorCode::UnknownAssessment, fmt::format("unknown assessment '{}'", id));
  }
  return it->second;
}

std::vector<std::string> Store::assessment_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : assessments_) ids.push_back(id);
  return ids;
}

Assessment Store::get(std::string_view id) const {
  std::shared_lock lock(mutex_);
  return find_locked(id);
}

ProgressSnapshot Store::progress_of(std::string_view id) const {
  std::shared_lock lock(mutex_);
  return progress(find_locked(id), *bank_);
}

std::vector<ProcessResult> Store::results_of(std::string_view id,
                                             const MeasurementConfig& config) const {
  std::shared_lock lock(mutex_);
  return measure(find_locked(id), *bank_, config);
}

TokenOwner Store::authenticate(std::string_view token) const {
  if (token.empty()) {
    throw Error(ErrorCode::AuthError, "missing participant token");
  }
  const auto hash = sha256_hex(token);
  std::shared_lock lock(mutex_);
  auto it = token_index_.find(hash);
  if (it == token_index_.end()) {
    throw Error(ErrorCode::AuthError, "invalid participant token");
  }
  return it->second;
}

Assessment Store::create(std::string id, std::string org_profile,
                         std::vector<std::string> processes, CapabilityLevel target_level) {
  std::unique_lock lock(mutex_);
  if (id.empty()) {
    do {
      id = "a-" + random_token().substr(0, 16);
    } while (assessments_.contains(id));
  }
  json event = {{"op", "create"},
                {"assessment", id},
                {"org_profile", std::move(org_profile)},
                {"processes", std::move(processes)},
                {"target_level", to_int(target_level)},
                {"at", clock_()}};
  commit(std::move(event));
  return find_locked(id);
}

Registration Store::register_participant(std::string_view id, std::string display_name,
                                         std::vector<Assignment> assignments) {
  std::unique_lock lock(mutex_);
  const auto& a = find_locked(id);
  auto token = random_token();
  auto hash = sha256_hex(token);
  json event = {{"op", "register"},
                {"assessment", id},
                {"participant", fmt::format("p{:03}", a.participants.size() + 1)},
                {"display_name", std::move(display_name)},
                {"assignments", assignments_json(assignments)},
                {"token_hash", hash},
                {"at", clock_()}};
  commit(std::move(event));
  const auto& participant = find_locked(id).participants.back();
  token_index_[hash] = TokenOwner{std::string(id), participant.id};
  return Registration{participant, std::move(token)};
}

void Store::open(std::string_view id) {
  std::unique_lock lock(mutex_);
  commit({{"op", "open"}, {"assessment", id}, {"at", clock_()}});
}

void Store::close(std::string_view id) {
  std::unique_lock lock(mutex_);
  commit({{"op", "close"}, {"assessment", id}, {"at", clock_()}});
}

bool Store::submit(std::string_view id, std::string_view participant, std::string_view process,
                   std::string_view question, AnswerOption answer) {
  std::unique_lock lock(mutex_);
  const auto& a = find_locked(id);
  const bool first =
      !a.responses.contains(ResponseKey{std::string(participant), std::string(process),
                                        std::string(question)});
  commit({{"op", "respond"},
          {"assessment", id},
          {"participant", participant},
          {"process", process},
          {"question", question},
          {"answer", to_string(answer)},
          {"at", clock_()}});
  return first;
}

std::filesystem::path Store::report_path(std::string_view id) const {
  return data_dir_ / "reports" / (std::string(id) + ".json");
}

AssessmentReport Store::build_report(std::string_view id, const MeasurementConfig& config) {
  std::unique_lock lock(mutex_);
  const auto& a = find_locked(id);
  auto results = measure(a, *bank_, config);
  auto report = compose_report(a, results, *bank_, config);
  write_file_atomic(report_path(id), render_report(report, ReportFormat::Structured));
  if (a.state == AssessmentState::Closed) {
    commit({{"op", "reported"}, {"assessment", id}, {"at", clock_()}});
  }
  return report;
}

std::optional<AssessmentReport> Store::stored_report(std::string_view id) const {
  std::shared_lock lock(mutex_);
  find_locked(id);
  const auto path = report_path(id);
  if (!std::filesystem::exists(path)) {
    return std::nullopt;
  }
  return report_from_json(detail::parse_document(read_file(path)));
}

}  // namespace smpa
