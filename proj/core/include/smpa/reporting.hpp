#pragma once

// Phase 4: the improvement report. A question whose knowledge score bands N
// or P yields one entry carrying its knowledge item, riskiest first.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "smpa/bank.hpp"
#include "smpa/measurement.hpp"
#include "smpa/survey.hpp"

namespace smpa {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::size_t kSummaryRisksPerProcess = 5;
inline constexpr std::string_view kMissingGuidanceObservation = "risk identified";

struct ReportEntry {
  std::string question;
  std::string process;
  ProcessAttribute attribute = ProcessAttribute::PA1_1;
  std::string question_text;
  double knowledge_score = 0.0;
  RatingBand band = RatingBand::N;
  std::optional<std::string> knowledge_item;
  std::string observation;
  std::optional<std::string> recommendation;
  bool guidance_missing = false;

  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

struct ProcessReport {
  ProcessRef process;
  CapabilityLevel capability_level = CapabilityLevel::CL0;
  std::vector<AttributeResult> attributes;
  std::vector<ReportEntry> entries;

  friend bool operator==(const ProcessReport&, const ProcessReport&) = default;
};

struct AssessmentReport {
  int schema_version = kReportSchemaVersion;
  std::string assessment_id;
  std::string org_profile;
  CapabilityLevel target_level = CapabilityLevel::CL5;
  std::string created_at;
  std::optional<std::string> opened_at;
  std::optional<std::string> closed_at;
  std::string bank_fingerprint;
  MeasurementConfig method;
  std::vector<ProcessReport> processes;

  friend bool operator==(const AssessmentReport&, const AssessmentReport&) = default;
};

// Entries for one process, ordered by (knowledge_score, question id).
// Throws Error{BankMismatch} for a question unknown to `bank`.
std::vector<ReportEntry> select_knowledge_items(const ProcessResult& result,
                                                const ContentBank& bank);

// Pure assembly; does not touch the assessment state.
// Throws Error{InvalidState|IncompleteResults|BankMismatch}.
AssessmentReport compose_report(const Assessment& assessment,
                                const std::vector<ProcessResult>& results,
                                const ContentBank& bank, const MeasurementConfig& config = {});

// compose_report, then Closed -> Reported on first success.
AssessmentReport build_report(Assessment& assessment, const std::vector<ProcessResult>& results,
                              const ContentBank& bank, std::string now,
                              const MeasurementConfig& config = {});

enum class ReportFormat { Structured, Markdown, Html };

// "structured" | "json", "markdown" | "md", "html"; Error{UnsupportedFormat}.
ReportFormat parse_report_format(std::string_view text);

nlohmann::json report_to_json(const AssessmentReport& report);
// Throws Error{ParseError|VersionError}.
AssessmentReport report_from_json(const nlohmann::json& document);

// Deterministic bytes for a fixed report. Structured output is the
// two-space-indented document plus a trailing newline.
std::string render_report(const AssessmentReport& report, ReportFormat format);

}  // namespace smpa
