#include "smpa/measurement.hpp"

#include <cmath>

#include "json_util.hpp"

namespace smpa {

using detail::json;

void ScaleMapping::validate() const {
  for (std::size_t i = 0; i < answer_percent.size(); ++i) {
    const double v = answer_percent[i];
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
      throw Error(ErrorCode::ValidationError, "answer percent outside [0,100]",
                  fmt::format("scale.answer_percent[{}]", i));
    }
    if (i > 0 && !(answer_percent[i - 1] < v)) {
      throw Error(ErrorCode::ValidationError, "answer percents must strictly increase N<P<L<F",
                  fmt::format("scale.answer_percent[{}]", i));
    }
  }
  for (std::size_t i = 0; i < band_upper.size(); ++i) {
    const double v = band_upper[i];
    if (!std::isfinite(v) || v <= 0.0 || v >= 100.0) {
      throw Error(ErrorCode::ValidationError, "band bound outside (0,100)",
                  fmt::format("scale.band_upper[{}]", i));
    }
    if (i > 0 && !(band_upper[i - 1] < v)) {
      throw Error(ErrorCode::ValidationError, "band bounds must strictly increase",
                  fmt::format("scale.band_upper[{}]", i));
    }
  }
}

std::optional<double> answer_to_percent(AnswerOption answer, const ScaleMapping& scale) {
  if (answer == AnswerOption::Unable) {
    return std::nullopt;
  }
  return scale.answer_percent[static_cast<std::size_t>(answer)];
}

RatingBand band_of(double percent, const ScaleMapping& scale) {
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw Error(ErrorCode::OutOfRange, fmt::format("percent {} outside [0,100]", percent));
  }
  if (percent <= scale.band_upper[0]) return RatingBand::N;
  if (percent <= scale.band_upper[1]) return RatingBand::P;
  if (percent <= scale.band_upper[2]) return RatingBand::L;
  return RatingBand::F;
}

QuestionResult question_result(std::string_view question, std::string_view process,
                               std::span<const Response> responses, const ScaleMapping& scale) {
  QuestionResult result;
  result.question = std::string(question);
  result.process = std::string(process);
  double sum = 0.0;
  for (const auto& r : responses) {
    if (r.question != question || r.process != process) {
      throw Error(ErrorCode::MixedQuestionIds,
                  fmt::format("response for {}/{} mixed into {}/{}", r.process, r.question,
                              process, question));
    }
    if (auto percent = answer_to_percent(r.answer, scale)) {
      sum += *percent;
      ++result.count;
    } else {
      ++result.unable_count;
    }
  }
  if (result.count > 0) {
    result.knowledge_score = sum / static_cast<double>(result.count);
    result.band = band_of(*result.knowledge_score, scale);
  }
  return result;
}

AttributeResult attribute_result(const ContentBank& bank, ProcessAttribute attribute,
                                 std::string_view process, std::span<const Response> responses,
                                 const MeasurementConfig& config) {
  AttributeResult result;
  result.attribute = attribute;
  result.process = std::string(process);
  std::vector<double> percents;
  percents.reserve(responses.size());
  double sum = 0.0;
  for (const auto& r : responses) {
    const auto* q = bank.find_question(r.question);
    if (q == nullptr) {
      throw Error(ErrorCode::BankMismatch, fmt::format("unknown question '{}'", r.question));
    }
    if (q->attribute != attribute || r.process != process) {
      throw Error(ErrorCode::MixedAttributes,
                  fmt::format("response to {} ({}, {}) mixed into {} for {}", r.question,
                              to_string(q->attribute), r.process, to_string(attribute), process));
    }
    if (auto percent = answer_to_percent(r.answer, config.scale)) {
      percents.push_back(*percent);
      sum += *percent;
    }
  }
  result.count = percents.size();
  if (result.count == 0) {
    return result;
  }
  const double n = static_cast<double>(result.count);
  const double mean = sum / n;
  result.mean_percent = mean;
  result.rating = band_of(mean, config.scale);
  if (result.count >= 2 && mean > 0.0) {
    double squares = 0.0;
    for (double x : percents) {
      squares += (x - mean) * (x - mean);
    }
    result.cv = std::sqrt(squares / n) / mean;
    result.low_reliability = *result.cv > config.cv_threshold;
  }
  return result;
}

CapabilityLevel determine_capability_level(const std::array<Rating, kAttributeCount>& ratings) {
  int achieved = 0;
  for (int level = 1; level <= 5; ++level) {
    bool ok = true;
    for (auto attribute : kAllAttributes) {
      const int attr_level = to_int(level_of(attribute));
      const auto& rating = ratings[index_of(attribute)];
      if (attr_level < level) {
        ok = ok && rating == RatingBand::F;
      } else if (attr_level == level) {
        ok = ok && (rating == RatingBand::F || rating == RatingBand::L);
      }
    }
    if (!ok) {
      break;
    }
    achieved = level;
  }
  return static_cast<CapabilityLevel>(achieved);
}

CapabilityLevel determine_capability_level(const AttributeRatings& ratings) {
  std::array<Rating, kAttributeCount> dense{};
  for (auto attribute : kAllAttributes) {
    auto it = ratings.find(attribute);
    if (it == ratings.end()) {
      throw Error(ErrorCode::MissingAttribute,
                  fmt::format("no rating for {}", to_string(attribute)));
    }
    dense[index_of(attribute)] = it->second;
  }
  return determine_capability_level(dense);
}

ProcessResult assess_process(const Assessment& assessment, const ContentBank& bank,
                             std::string_view process, const MeasurementConfig& config) {
  if (assessment.state != AssessmentState::Closed &&
      assessment.state != AssessmentState::Reported) {
    throw Error(ErrorCode::InvalidState,
                fmt::format("assessment '{}' must be closed before measurement (state {})",
                            assessment.id, to_string(assessment.state)));
  }
  if (!assessment.assesses(process)) {
    throw Error(ErrorCode::UnknownProcess,
                fmt::format("process '{}' is not part of assessment '{}'", process, assessment.id));
  }
  require_same_bank(assessment, bank);
  config.scale.validate();

  std::map<std::string, std::vector<Response>> by_question;
  std::array<std::vector<Response>, kAttributeCount> by_attribute;
  for (const auto& [key, r] : assessment.responses) {
    if (r.process != process) {
      continue;
    }
    const auto* q = bank.find_question(r.question);
    if (q == nullptr) {
      throw Error(ErrorCode::BankMismatch, fmt::format("unknown question '{}'", r.question));
    }
    by_question[r.question].push_back(r);
    by_attribute[index_of(q->attribute)].push_back(r);
  }

  ProcessResult result;
  result.process = *bank.find_process(process);
  for (const auto* q : questions_for_process(bank, process, assessment.target_level)) {
    auto it = by_question.find(q->id);
    std::span<const Response> rs;
    if (it != by_question.end()) {
      rs = it->second;
    }
    result.questions.push_back(question_result(q->id, process, rs, config.scale));
  }
  std::array<Rating, kAttributeCount> ratings{};
  for (auto attribute : kAllAttributes) {
    auto ar = attribute_result(bank, attribute, process, by_attribute[index_of(attribute)], config);
    ratings[index_of(attribute)] = ar.rating;
    result.attributes.push_back(std::move(ar));
  }
  result.capability_level = determine_capability_level(ratings);
  return result;
}

std::vector<ProcessResult> measure(const Assessment& assessment, const ContentBank& bank,
                                   const MeasurementConfig& config) {
  std::vector<ProcessResult> out;
  for (const auto& process : assessment.processes) {
    out.push_back(assess_process(assessment, bank, process, config));
  }
  return out;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> get_optional_number(const json& j, std::string_view key,
                                          const std::string& path) {
  const auto& v = detail::require_field(j, key, path);
  if (v.is_null()) {
    return std::nullopt;
  }
  if (!v.is_number()) {
    throw Error(ErrorCode::ParseError, "expected a number or null", detail::child_path(path, key));
  }
  return v.get<double>();
}

}  // namespace

json to_json(const MeasurementConfig& config) {
  return json{{"answer_percent",
               {{"N", config.scale.answer_percent[0]},
                {"P", config.scale.answer_percent[1]},
                {"L", config.scale.answer_percent[2]},
                {"F", config.scale.answer_percent[3]}}},
              {"band_upper",
               {{"N", config.scale.band_upper[0]},
                {"P", config.scale.band_upper[1]},
                {"L", config.scale.band_upper[2]}}},
              {"cv_threshold", config.cv_threshold}};
}

MeasurementConfig measurement_config_from_json(const json& j) {
  detail::require_object(j, "method");
  MeasurementConfig config;
  const auto& percent = detail::require_field(j, "answer_percent", "method");
  const auto& bounds = detail::require_field(j, "band_upper", "method");
  static constexpr std::array<std::string_view, 4> kKeys = {"N", "P", "L", "F"};
  for (std::size_t i = 0; i < 4; ++i) {
    config.scale.answer_percent[i] = detail::get_number(percent, kKeys[i], "method.answer_percent");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    config.scale.band_upper[i] = detail::get_number(bounds, kKeys[i], "method.band_upper");
  }
  config.cv_threshold = detail::get_number(j, "cv_threshold", "method");
  config.scale.validate();
  return config;
}

json to_json(const QuestionResult& r) {
  return json{{"question", r.question},
              {"process", r.process},
              {"count", r.count},
              {"unable_count", r.unable_count},
              {"knowledge_score", optional_number(r.knowledge_score)},
              {"band", rating_to_string(r.band)}};
}

json to_json(const AttributeResult& r) {
  return json{{"attribute", to_string(r.attribute)},
              {"process", r.process},
              {"count", r.count},
              {"mean_percent", optional_number(r.mean_percent)},
              {"rating", rating_to_string(r.rating)},
              {"cv", optional_number(r.cv)},
              {"low_reliability", r.low_reliability}};
}

AttributeResult attribute_result_from_json(const json& j, const std::string& path) {
  detail::require_object(j, path);
  AttributeResult r;
  auto attr_text = detail::get_string(j, "attribute", path);
  auto attribute = parse_attribute(attr_text);
  if (!attribute) {
    throw Error(ErrorCode::ParseError, fmt::format("unknown attribute '{}'", attr_text),
                detail::child_path(path, "attribute"));
  }
  r.attribute = *attribute;
  r.process = detail::get_string(j, "process", path);
  r.count = static_cast<std::size_t>(detail::get_int(j, "count", path));
  r.mean_percent = get_optional_number(j, "mean_percent", path);
  r.rating = parse_rating(detail::get_string(j, "rating", path));
  r.cv = get_optional_number(j, "cv", path);
  r.low_reliability = detail::get_bool(j, "low_reliability", path);
  return r;
}

json to_json(const ProcessResult& r) {
  json attributes = json::array();
  for (const auto& a : r.attributes) {
    attributes.push_back(to_json(a));
  }
  json questions = json::array();
  for (const auto& q : r.questions) {
    questions.push_back(to_json(q));
  }
  return json{{"process", {{"id", r.process.id}, {"name", r.process.name}}},
              {"capability_level", to_int(r.capability_level)},
              {"attributes", std::move(attributes)},
              {"questions", std::move(questions)}};
}

json results_to_json(const std::vector<ProcessResult>& results) {
  json processes = json::array();
  for (const auto& r : results) {
    processes.push_back(to_json(r));
  }
  return json{{"processes", std::move(processes)}};
}

}  // namespace smpa
