#pragma once

// Shared vocabulary of the ISO/IEC 15504 style measurement framework:
// capability levels, the nine process attributes, NPLF rating bands,
// process roles and the answer options offered to respondents.

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smpa {

struct ProcessRef {
  std::string id;
  std::string name;

  friend bool operator==(const ProcessRef&, const ProcessRef&) = default;
};

enum class CapabilityLevel : int {
  CL0 = 0,  // incomplete
  CL1 = 1,  // performed
  CL2 = 2,  // managed
  CL3 = 3,  // established
  CL4 = 4,  // predictable
  CL5 = 5,  // optimising
};

constexpr int to_int(CapabilityLevel level) noexcept { return static_cast<int>(level); }

// Throws Error{OutOfRange} outside 0..5.
CapabilityLevel capability_level_from_int(int value);

inline constexpr std::array<CapabilityLevel, 6> kAllLevels = {
    CapabilityLevel::CL0, CapabilityLevel::CL1, CapabilityLevel::CL2,
    CapabilityLevel::CL3, CapabilityLevel::CL4, CapabilityLevel::CL5};

enum class ProcessAttribute : int {
  PA1_1 = 0,
  PA2_1,
  PA2_2,
  PA3_1,
  PA3_2,
  PA4_1,
  PA4_2,
  PA5_1,
  PA5_2,
};

inline constexpr std::size_t kAttributeCount = 9;

inline constexpr std::array<ProcessAttribute, kAttributeCount> kAllAttributes = {
    ProcessAttribute::PA1_1, ProcessAttribute::PA2_1, ProcessAttribute::PA2_2,
    ProcessAttribute::PA3_1, ProcessAttribute::PA3_2, ProcessAttribute::PA4_1,
    ProcessAttribute::PA4_2, ProcessAttribute::PA5_1, ProcessAttribute::PA5_2};

constexpr std::size_t index_of(ProcessAttribute attribute) noexcept {
  return static_cast<std::size_t>(attribute);
}

constexpr CapabilityLevel level_of(ProcessAttribute attribute) noexcept {
  return attribute == ProcessAttribute::PA1_1
             ? CapabilityLevel::CL1
             : static_cast<CapabilityLevel>((static_cast<int>(attribute) + 1) / 2 + 1);
}

// "PA1.1" .. "PA5.2"
std::string_view to_string(ProcessAttribute attribute) noexcept;
std::optional<ProcessAttribute> parse_attribute(std::string_view text) noexcept;

// Attributes whose level is <= `level`, PA1.1 first then by level and index.
std::vector<ProcessAttribute> attributes_at_or_below(CapabilityLevel level);

enum class RatingBand : int { N = 0, P = 1, L = 2, F = 3 };

inline constexpr std::array<RatingBand, 4> kAllBands = {RatingBand::N, RatingBand::P,
                                                        RatingBand::L, RatingBand::F};

constexpr std::strong_ordering compare_bands(RatingBand a, RatingBand b) noexcept {
  return static_cast<int>(a) <=> static_cast<int>(b);
}

std::string_view to_string(RatingBand band) noexcept;
std::optional<RatingBand> parse_band(std::string_view text) noexcept;

// A band, or nullopt for an attribute/question with no scorable evidence.
using Rating = std::optional<RatingBand>;

// "N"/"P"/"L"/"F" or "Unassessed".
std::string_view rating_to_string(const Rating& rating) noexcept;
// Throws Error{ParseError} on anything else.
Rating parse_rating(std::string_view text);

enum class Role : int { ProcessManager = 0, ProcessPerformer = 1, ExternalStakeholder = 2 };

inline constexpr std::array<Role, 3> kAllRoles = {Role::ProcessManager, Role::ProcessPerformer,
                                                  Role::ExternalStakeholder};

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

// Unable means "cannot answer / not applicable": it counts toward completion
// but never toward any score.
enum class AnswerOption : int { N = 0, P = 1, L = 2, F = 3, Unable = 4 };

inline constexpr std::array<AnswerOption, 5> kAllAnswers = {
    AnswerOption::N, AnswerOption::P, AnswerOption::L, AnswerOption::F, AnswerOption::Unable};

std::string_view to_string(AnswerOption answer) noexcept;
std::optional<AnswerOption> parse_answer(std::string_view text) noexcept;

}  // namespace smpa
