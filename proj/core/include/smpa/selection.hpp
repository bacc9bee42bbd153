#pragma once

// Phase 1: rank candidate processes for assessment.
//
// importance_norm = (mean importance - 1) / 4          importance in 1..5
// gap_norm        = max(0, mean(expectation - perception)) / 6   both in 1..7
// combined        = w_importance * importance_norm + w_gap * gap_norm
//
// Ranks descend by combined, then by gap_norm, then by process id.

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace smpa {

enum class Perspective { Financial, Customer, Internal, Learning };

struct DriverRating {
  std::string process;
  Perspective perspective = Perspective::Financial;
  int importance = 1;  // 1..5
};

struct GapRating {
  std::string process;
  int expectation = 1;  // 1..7
  int perception = 1;   // 1..7
};

struct SelectionWeights {
  double importance = 0.5;
  double gap = 0.5;
};

struct ProcessScore {
  std::string process;
  double importance_norm = 0.0;
  double gap_norm = 0.0;
  double combined = 0.0;
  int rank = 0;
};

// Throws Error{EmptyInput|MismatchedProcessSets|InvalidWeights|OutOfRange}.
std::vector<ProcessScore> score_processes(const std::vector<DriverRating>& drivers,
                                          const std::vector<GapRating>& gaps,
                                          SelectionWeights weights = {});

struct SelectionInput {
  std::vector<DriverRating> drivers;
  std::vector<GapRating> gaps;
};

// {"drivers": [{"process","perspective","importance"}],
//  "gaps": [{"process","expectation","perception"}]}
SelectionInput parse_selection_input(const nlohmann::json& document);
nlohmann::json to_json(const std::vector<ProcessScore>& scores);

}  // namespace smpa
