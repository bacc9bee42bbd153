#include "smpa/simulation.hpp"

#include <cmath>
#include <random>

#include "json_util.hpp"

namespace smpa {

using detail::json;

void AnswerDistribution::validate(const std::string& path) const {
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw Error(ErrorCode::ValidationError, "probability must be finite and non-negative",
                  detail::child_path(path, to_string(static_cast<AnswerOption>(i))));
    }
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::ValidationError,
                fmt::format("probabilities sum to {} instead of 1", total), path);
  }
}

namespace {

AnswerDistribution parse_distribution(const json& j, const std::string& path) {
  detail::require_object(j, path);
  AnswerDistribution d;
  d.weights.fill(0.0);
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto answer = parse_answer(it.key());
    if (!answer) {
      throw Error(ErrorCode::ValidationError, fmt::format("unknown answer '{}'", it.key()),
                  detail::child_path(path, it.key()));
    }
    d.weights[static_cast<std::size_t>(*answer)] = detail::get_number(j, it.key(), path);
  }
  d.validate(path);
  return d;
}

std::vector<Assignment> parse_assignments(const json& j, const std::string& path) {
  std::vector<Assignment> out;
  const auto& list = detail::require_array(j, "assignments", path);
  const auto list_path = detail::child_path(path, "assignments");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto p = detail::index_path(list_path, i);
    detail::require_object(list[i], p);
    auto role_text = detail::get_string(list[i], "role", p);
    auto role = parse_role(role_text);
    if (!role) {
      throw Error(ErrorCode::ValidationError, fmt::format("unknown role '{}'", role_text),
                  detail::child_path(p, "role"));
    }
    out.push_back(Assignment{detail::get_string(list[i], "process", p), *role});
  }
  return out;
}

// Uniform in [0, 1) from the top 53 bits.
double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

AnswerOption draw(const AnswerDistribution& d, std::mt19937_64& rng) {
  const double u = unit_interval(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < d.weights.size(); ++i) {
    if (d.weights[i] <= 0.0) continue;
    last_positive = i;
    cumulative += d.weights[i];
    if (u < cumulative) {
      return static_cast<AnswerOption>(i);
    }
  }
  return static_cast<AnswerOption>(last_positive);
}

const AnswerDistribution& distribution_for(const SimulationProfile& profile,
                                           const std::string& process,
                                           ProcessAttribute attribute, Role role) {
  const AnswerDistribution* chosen = &profile.default_distribution;
  for (const auto& rule : profile.rules) {
    if ((!rule.process || *rule.process == process) &&
        (!rule.attribute || *rule.attribute == attribute) && (!rule.role || *rule.role == role)) {
      chosen = &rule.distribution;
    }
  }
  return *chosen;
}

}  // namespace

SimulationProfile parse_simulation_profile(const json& document) {
  detail::require_object(document, "");
  SimulationProfile profile;
  if (document.contains("seed")) {
    const auto& seed = document["seed"];
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw Error(ErrorCode::ParseError, "expected an integer", "seed");
    }
    profile.seed = seed.get<std::uint64_t>();
  }
  const auto& roster = detail::require_array(document, "roster", "");
  for (std::size_t i = 0; i < roster.size(); ++i) {
    const auto path = detail::index_path("roster", i);
    detail::require_object(roster[i], path);
    profile.roster.push_back(
        RosterEntry{detail::get_string(roster[i], "name", path), parse_assignments(roster[i], path)});
  }
  if (document.contains("default")) {
    profile.default_distribution = parse_distribution(document["default"], "default");
  }
  if (document.contains("rules")) {
    const auto& rules = detail::require_array(document, "rules", "");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto path = detail::index_path("rules", i);
      detail::require_object(rules[i], path);
      DistributionRule rule;
      rule.process = detail::get_optional_string(rules[i], "process", path);
      if (auto text = detail::get_optional_string(rules[i], "attribute", path)) {
        rule.attribute = parse_attribute(*text);
        if (!rule.attribute) {
          throw Error(ErrorCode::ValidationError, fmt::format("unknown attribute '{}'", *text),
                      detail::child_path(path, "attribute"));
        }
      }
      if (auto text = detail::get_optional_string(rules[i], "role", path)) {
        rule.role = parse_role(*text);
        if (!rule.role) {
          throw Error(ErrorCode::ValidationError, fmt::format("unknown role '{}'", *text),
                      detail::child_path(path, "role"));
        }
      }
      rule.distribution = parse_distribution(detail::require_field(rules[i], "distribution", path),
                                             detail::child_path(path, "distribution"));
      profile.rules.push_back(std::move(rule));
    }
  }
  return profile;
}

std::vector<SimulatedResponse> simulate_responses(const Assessment& assessment,
                                                  const ContentBank& bank,
                                                  const SimulationProfile& profile,
                                                  const std::vector<std::string>& participant_ids,
                                                  std::uint64_t seed) {
  if (participant_ids.size() != profile.roster.size()) {
    throw Error(ErrorCode::ValidationError, "roster and participant ids differ in length");
  }
  std::mt19937_64 rng(seed);
  std::vector<SimulatedResponse> out;
  for (const auto& participant_id : participant_ids) {
    const auto* participant = assessment.find_participant(participant_id);
    if (participant == nullptr) {
      throw Error(ErrorCode::UnknownParticipant,
                  fmt::format("unknown participant '{}'", participant_id));
    }
    for (const auto& item : allocate_questionnaire(assessment, bank, participant_id)) {
      const auto role = *participant->role_for(item.process);
      const auto& d = distribution_for(profile, item.process, item.question->attribute, role);
      out.push_back(SimulatedResponse{participant_id, item.process, item.question->id, draw(d, rng)});
    }
  }
  return out;
}

json responses_to_json(const std::vector<SimulatedResponse>& responses) {
  json list = json::array();
  for (const auto& r : responses) {
    list.push_back({{"participant", r.participant},
                    {"process", r.process},
                    {"question", r.question},
                    {"answer", to_string(r.answer)}});
  }
  return json{{"responses", std::move(list)}};
}

std::vector<SimulatedResponse> responses_from_json(const json& document) {
  detail::require_object(document, "");
  const auto& list = detail::require_array(document, "responses", "");
  std::vector<SimulatedResponse> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto path = detail::index_path("responses", i);
    detail::require_object(list[i], path);
    auto answer_text = detail::get_string(list[i], "answer", path);
    auto answer = parse_answer(answer_text);
    if (!answer) {
      throw Error(ErrorCode::ValidationError, fmt::format("unknown answer '{}'", answer_text),
                  detail::child_path(path, "answer"));
    }
    out.push_back(SimulatedResponse{detail::get_string(list[i], "participant", path),
                                    detail::get_string(list[i], "process", path),
                                    detail::get_string(list[i], "question", path), *answer});
  }
  return out;
}

}  // namespace smpa
