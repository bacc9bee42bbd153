#pragma once

// Phase 3: knowledge scores per question, pooled attribute ratings with a
// coefficient-of-variation reliability signal, and the capability ladder.
//
// Answers map to percentages (default: band midpoints 7.5/32.5/67.5/92.5).
// Percentages band as N [0,15], P (15,50], L (50,85], F (85,100]; a boundary
// value belongs to the lower band.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "smpa/bank.hpp"
#include "smpa/model.hpp"
#include "smpa/survey.hpp"

namespace smpa {

struct ScaleMapping {
  // Indexed by AnswerOption N, P, L, F.
  std::array<double, 4> answer_percent{7.5, 32.5, 67.5, 92.5};
  // Inclusive upper bounds of N, P and L; F runs to 100.
  std::array<double, 3> band_upper{15.0, 50.0, 85.0};

  // Throws Error{ValidationError} unless percents strictly increase within
  // [0,100] and bounds strictly increase within (0,100).
  void validate() const;

  friend bool operator==(const ScaleMapping&, const ScaleMapping&) = default;
};

struct MeasurementConfig {
  ScaleMapping scale;
  double cv_threshold = 0.5;

  friend bool operator==(const MeasurementConfig&, const MeasurementConfig&) = default;
};

// nullopt for Unable.
std::optional<double> answer_to_percent(AnswerOption answer, const ScaleMapping& scale = {});

// Throws Error{OutOfRange} outside [0,100].
RatingBand band_of(double percent, const ScaleMapping& scale = {});

struct QuestionResult {
  std::string question;
  std::string process;
  std::size_t count = 0;  // scorable responses
  std::size_t unable_count = 0;
  std::optional<double> knowledge_score;
  Rating band;  // nullopt = Unassessed

  friend bool operator==(const QuestionResult&, const QuestionResult&) = default;
};

// All responses must reference (question, process); otherwise
// Error{MixedQuestionIds}.
QuestionResult question_result(std::string_view question, std::string_view process,
                               std::span<const Response> responses,
                               const ScaleMapping& scale = {});

struct AttributeResult {
  ProcessAttribute attribute = ProcessAttribute::PA1_1;
  std::string process;
  std::size_t count = 0;
  std::optional<double> mean_percent;
  Rating rating;
  std::optional<double> cv;  // undefined when count < 2 or mean == 0
  bool low_reliability = false;

  friend bool operator==(const AttributeResult&, const AttributeResult&) = default;
};

// Pools every scorable response (equal weight each) to questions of
// `attribute` for `process`. Throws Error{MixedAttributes} when a response
// references another attribute or process, Error{BankMismatch} for an
// unknown question.
AttributeResult attribute_result(const ContentBank& bank, ProcessAttribute attribute,
                                 std::string_view process, std::span<const Response> responses,
                                 const MeasurementConfig& config = {});

using AttributeRatings = std::map<ProcessAttribute, Rating>;

// Largest L >= 1 with every attribute below L rated F and every attribute at
// L rated F or L; CL0 when none. Unassessed satisfies neither condition.
// Throws Error{MissingAttribute} unless all nine attributes are present.
CapabilityLevel determine_capability_level(const AttributeRatings& ratings);
CapabilityLevel determine_capability_level(const std::array<Rating, kAttributeCount>& ratings);

struct ProcessResult {
  ProcessRef process;
  std::vector<AttributeResult> attributes;  // nine, PA1.1 .. PA5.2
  std::vector<QuestionResult> questions;    // every applicable question, by attribute then id
  CapabilityLevel capability_level = CapabilityLevel::CL0;

  friend bool operator==(const ProcessResult&, const ProcessResult&) = default;
};

// Requires a Closed (or Reported) assessment. Throws
// Error{InvalidState|UnknownProcess|BankMismatch}.
ProcessResult assess_process(const Assessment& assessment, const ContentBank& bank,
                             std::string_view process, const MeasurementConfig& config = {});

// One ProcessResult per assessed process, in assessment order.
std::vector<ProcessResult> measure(const Assessment& assessment, const ContentBank& bank,
                                   const MeasurementConfig& config = {});

nlohmann::json to_json(const MeasurementConfig& config);
MeasurementConfig measurement_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QuestionResult& result);
nlohmann::json to_json(const AttributeResult& result);
nlohmann::json to_json(const ProcessResult& result);
nlohmann::json results_to_json(const std::vector<ProcessResult>& results);

AttributeResult attribute_result_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace smpa
