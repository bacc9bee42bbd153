#pragma once

// Durable single-writer store for assessments.
//
// Layout of a data directory:
//   LOCK            flock()ed for the lifetime of the Store
//   state.json      snapshot {schema_version, seq, bank_fingerprint, assessments}
//   journal.log     one JSON event per line, fdatasync()ed before a mutation
//                   returns; replayed through the survey functions on open
//   reports/<id>.json   structured reports, replaced atomically
//
// A torn final journal line (crash mid-write) is discarded on open; any
// other unreadable line is an error.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "smpa/bank.hpp"
#include "smpa/measurement.hpp"
#include "smpa/reporting.hpp"
#include "smpa/survey.hpp"

namespace smpa {

inline constexpr int kStoreSchemaVersion = 1;

using Clock = std::function<std::string()>;

// Current UTC time as "YYYY-MM-DDThh:mm:ssZ".
std::string utc_now();

// Writes `contents` to `path` via a temporary file, fsync and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

struct Registration {
  Participant participant;
  std::string token;  // returned once, never stored
};

struct TokenOwner {
  std::string assessment;
  std::string participant;
};

class Store {
 public:
  // Creates the directory if needed, takes the lock (Error{StoreLocked} when
  // another process holds it) and loads state.
  Store(std::filesystem::path data_dir, std::shared_ptr<const ContentBank> bank,
        Clock clock = utc_now);
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const ContentBank& bank() const noexcept { return *bank_; }
  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

  // Reads observe a consistent snapshot.
  std::vector<std::string> assessment_ids() const;
  Assessment get(std::string_view id) const;
  ProgressSnapshot progress_of(std::string_view id) const;
  std::vector<ProcessResult> results_of(std::string_view id,
                                        const MeasurementConfig& config = {}) const;
  TokenOwner authenticate(std::string_view token) const;

  // Mutations are journaled and synced before they return.
  Assessment create(std::string id, std::string org_profile, std::vector<std::string> processes,
                    CapabilityLevel target_level);
  // Generates a fresh token; only its hash is persisted.
  Registration register_participant(std::string_view id, std::string display_name,
                                    std::vector<Assignment> assignments);
  void open(std::string_view id);
  void close(std::string_view id);
  // Returns true for a first answer, false for a replacement.
  bool submit(std::string_view id, std::string_view participant, std::string_view process,
              std::string_view question, AnswerOption answer);

  // Measures, composes, persists reports/<id>.json, and marks the assessment
  // Reported on first success.
  AssessmentReport build_report(std::string_view id, const MeasurementConfig& config = {});
  std::optional<AssessmentReport> stored_report(std::string_view id) const;

  // Folds the journal into a new snapshot.
  void compact();

 private:
  void load();
  void replay_line(const nlohmann::json& event, std::uint64_t line_number);
  void apply(std::map<std::string, Assessment>& assessments, const nlohmann::json& event) const;
  void commit(nlohmann::json event);
  void append_journal(const std::string& line);
  void compact_locked();
  const Assessment& find_locked(std::string_view id) const;
  std::filesystem::path report_path(std::string_view id) const;

  std::filesystem::path data_dir_;
  std::shared_ptr<const ContentBank> bank_;
  Clock clock_;
  int lock_fd_ = -1;
  int journal_fd_ = -1;
  std::uint64_t seq_ = 0;
  std::uint64_t journal_events_ = 0;
  std::map<std::string, Assessment> assessments_;
  std::unordered_map<std::string, TokenOwner> token_index_;  // by token hash
  mutable std::shared_mutex mutex_;
};

}  // namespace smpa
