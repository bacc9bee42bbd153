#include "smpa/model.hpp"

#include <fmt/format.h>

#include "smpa/error.hpp"

namespace smpa {

namespace {

constexpr std::array<std::string_view, kAttributeCount> kAttributeNames = {
    "PA1.1", "PA2.1", "PA2.2", "PA3.1", "PA3.2", "PA4.1", "PA4.2", "PA5.1", "PA5.2"};

constexpr std::array<std::string_view, 4> kBandNames = {"N", "P", "L", "F"};

constexpr std::array<std::string_view, 3> kRoleNames = {"ProcessManager", "ProcessPerformer",
                                                        "ExternalStakeholder"};

constexpr std::array<std::string_view, 5> kAnswerNames = {"N", "P", "L", "F", "Unable"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view text) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) {
      return static_cast<Enum>(i);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnknownProcess: return "UnknownProcess";
    case ErrorCode::UnknownAssessment: return "UnknownAssessment";
    case ErrorCode::UnknownParticipant: return "UnknownParticipant";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::EmptyProcessList: return "EmptyProcessList";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::DuplicateRoleForProcess: return "DuplicateRoleForProcess";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::NotAllocated: return "NotAllocated";
    case ErrorCode::MixedQuestionIds: return "MixedQuestionIds";
    case ErrorCode::MixedAttributes: return "MixedAttributes";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::BankMismatch: return "BankMismatch";
    case ErrorCode::IncompleteResults: return "IncompleteResults";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MismatchedProcessSets: return "MismatchedProcessSets";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::StoreLocked: return "StoreLocked";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::string path)
    : std::runtime_error(path.empty() ? fmt::format("{}: {}", to_string(code), message)
                                      : fmt::format("{}: {}: {}", to_string(code), path, message)),
      code_(code),
      message_(std::move(message)),
      path_(std::move(path)) {}

CapabilityLevel capability_level_from_int(int value) {
  if (value < 0 || value > 5) {
    throw Error(ErrorCode::OutOfRange, fmt::format("capability level {} outside 0..5", value));
  }
  return static_cast<CapabilityLevel>(value);
}

std::string_view to_string(ProcessAttribute attribute) noexcept {
  return kAttributeNames[index_of(attribute)];
}

std::optional<ProcessAttribute> parse_attribute(std::string_view text) noexcept {
  return lookup<ProcessAttribute>(kAttributeNames, text);
}

std::vector<ProcessAttribute> attributes_at_or_below(CapabilityLevel level) {
  std::vector<ProcessAttribute> out;
  for (auto attribute : kAllAttributes) {
    if (level_of(attribute) <= level) {
      out.push_back(attribute);
    }
  }
  return out;
}

std::string_view to_string(RatingBand band) noexcept {
  return kBandNames[static_cast<std::size_t>(band)];
}

std::optional<RatingBand> parse_band(std::string_view text) noexcept {
  return lookup<RatingBand>(kBandNames, text);
}

std::string_view rating_to_string(const Rating& rating) noexcept {
  return rating ? to_string(*rating) : std::string_view{"Unassessed"};
}

Rating parse_rating(std::string_view text) {
  if (text == "Unassessed") {
    return std::nullopt;
  }
  if (auto band = parse_band(text)) {
    return band;
  }
  throw Error(ErrorCode::ParseError, fmt::format("unknown rating '{}'", text));
}

std::string_view to_string(Role role) noexcept {
  return kRoleNames[static_cast<std::size_t>(role)];
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  return lookup<Role>(kRoleNames, text);
}

std::string_view to_string(AnswerOption answer) noexcept {
  return kAnswerNames[static_cast<std::size_t>(answer)];
}

std::optional<AnswerOption> parse_answer(std::string_view text) noexcept {
  return lookup<AnswerOption>(kAnswerNames, text);
}

}  // namespace smpa
