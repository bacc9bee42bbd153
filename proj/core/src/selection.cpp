#include "smpa/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json_util.hpp"

namespace smpa {

using detail::json;

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
  double mean() const { return sum / static_cast<double>(count); }
};

Perspective parse_perspective(const std::string& text, const std::string& path) {
  if (text == "Financial") return Perspective::Financial;
  if (text == "Customer") return Perspective::Customer;
  if (text == "Internal") return Perspective::Internal;
  if (text == "Learning") return Perspective::Learning;
  throw Error(ErrorCode::ValidationError, fmt::format("unknown perspective '{}'", text), path);
}

}  // namespace

std::vector<ProcessScore> score_processes(const std::vector<DriverRating>& drivers,
                                          const std::vector<GapRating>& gaps,
                                          SelectionWeights weights) {
  if (drivers.empty() || gaps.empty()) {
    throw Error(ErrorCode::EmptyInput, "driver and gap ratings are both required");
  }
  if (!std::isfinite(weights.importance) || !std::isfinite(weights.gap) ||
      weights.importance < 0.0 || weights.gap < 0.0 ||
      std::abs(weights.importance + weights.gap - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidWeights,
                fmt::format("weights {} and {} must be non-negative and sum to 1",
                            weights.importance, weights.gap));
  }

  std::map<std::string, Accumulator> importance;
  std::map<std::string, Accumulator> gap;
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    const auto& d = drivers[i];
    if (d.importance < 1 || d.importance > 5) {
      throw Error(ErrorCode::OutOfRange, "importance must be within 1..5",
                  fmt::format("drivers[{}].importance", i));
    }
    auto& acc = importance[d.process];
    acc.sum += d.importance;
    ++acc.count;
  }
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const auto& g = gaps[i];
    if (g.expectation < 1 || g.expectation > 7) {
      throw Error(ErrorCode::OutOfRange, "expectation must be within 1..7",
                  fmt::format("gaps[{}].expectation", i));
    }
    if (g.perception < 1 || g.perception > 7) {
      throw Error(ErrorCode::OutOfRange, "perception must be within 1..7",
                  fmt::format("gaps[{}].perception", i));
    }
    auto& acc = gap[g.process];
    acc.sum += g.expectation - g.perception;
    ++acc.count;
  }

  std::set<std::string> driver_ids;
  std::set<std::string> gap_ids;
  for (const auto& [id, _] : importance) driver_ids.insert(id);
  for (const auto& [id, _] : gap) gap_ids.insert(id);
  if (driver_ids != gap_ids) {
    throw Error(ErrorCode::MismatchedProcessSets,
                "every process needs both driver and gap ratings");
  }

  std::vector<ProcessScore> scores;
  for (const auto& [id, imp] : importance) {
    ProcessScore s;
    s.process = id;
    s.importance_norm = (imp.mean() - 1.0) / 4.0;
    s.gap_norm = std::max(0.0, gap.at(id).mean()) / 6.0;
    s.combined = weights.importance * s.importance_norm + weights.gap * s.gap_norm;
    scores.push_back(std::move(s));
  }
  std::sort(scores.begin(), scores.end(), [](const ProcessScore& a, const ProcessScore& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    if (a.gap_norm != b.gap_norm) return a.gap_norm > b.gap_norm;
    return a.process < b.process;
  });
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i].rank = static_cast<int>(i) + 1;
  }
  return scores;
}

SelectionInput parse_selection_input(const json& document) {
  detail::require_object(document, "");
  SelectionInput input;
  const auto& drivers = detail::require_array(document, "drivers", "");
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    const auto path = detail::index_path("drivers", i);
    detail::require_object(drivers[i], path);
    input.drivers.push_back(DriverRating{
        detail::get_string(drivers[i], "process", path),
        parse_perspective(detail::get_string(drivers[i], "perspective", path),
                          detail::child_path(path, "perspective")),
        static_cast<int>(detail::get_int(drivers[i], "importance", path))});
  }
  const auto& gaps = detail::require_array(document, "gaps", "");
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const auto path = detail::index_path("gaps", i);
    detail::require_object(gaps[i], path);
    input.gaps.push_back(GapRating{detail::get_string(gaps[i], "process", path),
                                   static_cast<int>(detail::get_int(gaps[i], "expectation", path)),
                                   static_cast<int>(detail::get_int(gaps[i], "perception", path))});
  }
  return input;
}

json to_json(const std::vector<ProcessScore>& scores) {
  json out = json::array();
  for (const auto& s : scores) {
    out.push_back({{"rank", s.rank},
                   {"process", s.process},
                   {"importance_norm", s.importance_norm},
                   {"gap_norm", s.gap_norm},
                   {"combined", s.combined}});
  }
  return out;
}

}  // namespace smpa
