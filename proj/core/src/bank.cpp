#include "smpa/bank.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json_util.hpp"
#include "smpa/crypto.hpp"

namespace smpa {

using detail::child_path;
using detail::index_path;
using detail::json;

namespace {

[[noreturn]] void invalid(std::string message, std::string path) {
  throw Error(ErrorCode::ValidationError, std::move(message), std::move(path));
}

ProcessRef parse_process(const json& j, const std::string& path) {
  detail::require_object(j, path);
  return ProcessRef{detail::get_string(j, "id", path), detail::get_string(j, "name", path)};
}

Question parse_question(const json& j, const std::string& path) {
  detail::require_object(j, path);
  Question q;
  q.id = detail::get_string(j, "id", path);

  auto attribute_text = detail::get_string(j, "attribute", path);
  auto attribute = parse_attribute(attribute_text);
  if (!attribute) {
    invalid(fmt::format("unknown process attribute '{}'", attribute_text),
            child_path(path, "attribute"));
  }
  q.attribute = *attribute;

  const auto& scope = detail::require_field(j, "scope", path);
  const auto scope_path = child_path(path, "scope");
  if (scope.is_string()) {
    if (scope.get<std::string>() != "generic") {
      invalid("scope must be \"generic\" or {\"process\": id}", scope_path);
    }
  } else if (scope.is_object()) {
    q.process = detail::get_string(scope, "process", scope_path);
  } else {
    throw Error(ErrorCode::ParseError, "expected \"generic\" or an object", scope_path);
  }

  q.text = detail::get_string(j, "text", path);

  const auto& roles = detail::require_array(j, "roles", path);
  const auto roles_path = child_path(path, "roles");
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (!roles[i].is_string()) {
      throw Error(ErrorCode::ParseError, "expected a string", index_path(roles_path, i));
    }
    auto role = parse_role(roles[i].get<std::string>());
    if (!role) {
      invalid(fmt::format("unknown role '{}'", roles[i].get<std::string>()),
              index_path(roles_path, i));
    }
    if (q.has_role(*role)) {
      invalid("duplicate role", index_path(roles_path, i));
    }
    q.roles.push_back(*role);
  }

  q.knowledge_item = detail::get_optional_string(j, "knowledge_item", path);
  return q;
}

KnowledgeItem parse_item(const json& j, const std::string& path) {
  detail::require_object(j, path);
  return KnowledgeItem{detail::get_string(j, "id", path),
                       detail::get_string(j, "observation", path),
                       detail::get_string(j, "recommendation", path)};
}

}  // namespace

bool Question::has_role(Role role) const noexcept {
  return std::find(roles.begin(), roles.end(), role) != roles.end();
}

ContentBank ContentBank::from_json(const json& document) {
  detail::require_object(document, "");
  const auto version = detail::get_int(document, "schema_version", "");
  if (version != kBankSchemaVersion) {
    throw Error(ErrorCode::VersionError,
                fmt::format("unsupported schema_version {} (expected {})", version,
                            kBankSchemaVersion),
                "schema_version");
  }

  ContentBank bank;
  bank.schema_version_ = static_cast<int>(version);

  const auto& processes = detail::require_array(document, "processes", "");
  for (std::size_t i = 0; i < processes.size(); ++i) {
    bank.processes_.push_back(parse_process(processes[i], index_path("processes", i)));
  }
  const auto& questions = detail::require_array(document, "questions", "");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    bank.questions_.push_back(parse_question(questions[i], index_path("questions", i)));
  }
  const auto& items = detail::require_array(document, "knowledge_items", "");
  for (std::size_t i = 0; i < items.size(); ++i) {
    bank.items_.push_back(parse_item(items[i], index_path("knowledge_items", i)));
  }

  bank.index_and_validate();
  return bank;
}

void ContentBank::index_and_validate() {
  if (processes_.empty()) {
    invalid("bank declares no processes", "processes");
  }
  if (questions_.empty()) {
    invalid("bank contains no questions", "questions");
  }

  for (std::size_t i = 0; i < processes_.size(); ++i) {
    const auto path = index_path("processes", i);
    if (processes_[i].id.empty()) {
      invalid("process id is empty", child_path(path, "id"));
    }
    if (processes_[i].name.empty()) {
      invalid("process name is empty", child_path(path, "name"));
    }
    if (!process_index_.emplace(processes_[i].id, i).second) {
      invalid(fmt::format("duplicate process id '{}'", processes_[i].id), child_path(path, "id"));
    }
  }

  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto path = index_path("knowledge_items", i);
    if (items_[i].id.empty()) {
      invalid("knowledge item id is empty", child_path(path, "id"));
    }
    if (items_[i].observation.empty()) {
      invalid("observation is empty", child_path(path, "observation"));
    }
    if (items_[i].recommendation.empty()) {
      invalid("recommendation is empty", child_path(path, "recommendation"));
    }
    if (!item_index_.emplace(items_[i].id, i).second) {
      invalid(fmt::format("duplicate knowledge item id '{}'", items_[i].id),
              child_path(path, "id"));
    }
  }

  for (std::size_t i = 0; i < questions_.size(); ++i) {
    const auto& q = questions_[i];
    const auto path = index_path("questions", i);
    if (q.id.empty()) {
      invalid("question id is empty", child_path(path, "id"));
    }
    if (!question_index_.emplace(q.id, i).second) {
      invalid(fmt::format("duplicate question id '{}'", q.id), child_path(path, "id"));
    }
    if (q.text.empty()) {
      invalid("question text is empty", child_path(path, "text"));
    }
    if (q.roles.empty()) {
      invalid("question has no roles", child_path(path, "roles"));
    }
    const bool level_one = q.attribute == ProcessAttribute::PA1_1;
    if (level_one && q.is_generic()) {
      invalid("PA1.1 questions must name a specific process", child_path(path, "scope"));
    }
    if (!level_one && !q.is_generic()) {
      invalid(fmt::format("{} questions must have generic scope", to_string(q.attribute)),
              child_path(path, "scope"));
    }
    if (q.process && !process_index_.contains(*q.process)) {
      invalid(fmt::format("undeclared process '{}'", *q.process),
              child_path(child_path(path, "scope"), "process"));
    }
    if (q.knowledge_item && !item_index_.contains(*q.knowledge_item)) {
      invalid(fmt::format("dangling knowledge item reference '{}'", *q.knowledge_item),
              child_path(path, "knowledge_item"));
    }
  }

  fingerprint_ = sha256_hex(to_json().dump());
}

ContentBank ContentBank::load(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(detail::parse_document(buffer.str()));
}

ContentBank ContentBank::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot open bank file '{}'", path.string()));
  }
  return load(in);
}

json ContentBank::to_json() const {
  json processes = json::array();
  for (const auto& p : processes_) {
    processes.push_back({{"id", p.id}, {"name", p.name}});
  }
  json questions = json::array();
  for (const auto& q : questions_) {
    json roles = json::array();
    for (auto role : q.roles) {
      roles.push_back(to_string(role));
    }
    json entry = {{"id", q.id},
                  {"attribute", to_string(q.attribute)},
                  {"text", q.text},
                  {"roles", std::move(roles)}};
    entry["scope"] = q.process ? json{{"process", *q.process}} : json("generic");
    if (q.knowledge_item) {
      entry["knowledge_item"] = *q.knowledge_item;
    }
    questions.push_back(std::move(entry));
  }
  json items = json::array();
  for (const auto& k : items_) {
    items.push_back(
        {{"id", k.id}, {"observation", k.observation}, {"recommendation", k.recommendation}});
  }
  return json{{"schema_version", schema_version_},
              {"processes", std::move(processes)},
              {"questions", std::move(questions)},
              {"knowledge_items", std::move(items)}};
}

const ProcessRef* ContentBank::find_process(std::string_view id) const {
  auto it = process_index_.find(std::string(id));
  return it == process_index_.end() ? nullptr : &processes_[it->second];
}

const Question* ContentBank::find_question(std::string_view id) const {
  auto it = question_index_.find(std::string(id));
  return it == question_index_.end() ? nullptr : &questions_[it->second];
}

const KnowledgeItem* ContentBank::find_knowledge_item(std::string_view id) const {
  auto it = item_index_.find(std::string(id));
  return it == item_index_.end() ? nullptr : &items_[it->second];
}

namespace {

template <typename Pred>
std::vector<const Question*> filter_questions(const ContentBank& bank, std::string_view process,
                                              CapabilityLevel target, Pred&& keep) {
  if (bank.find_process(process) == nullptr) {
    throw Error(ErrorCode::UnknownProcess, fmt::format("unknown process '{}'", process));
  }
  std::vector<const Question*> out;
  for (const auto& q : bank.questions()) {
    if (q.applies_to(process) && level_of(q.attribute) <= target && keep(q)) {
      out.push_back(&q);
    }
  }
  std::sort(out.begin(), out.end(), [](const Question* a, const Question* b) {
    if (a->attribute != b->attribute) {
      return a->attribute < b->attribute;
    }
    return a->id < b->id;
  });
  return out;
}

}  // namespace

std::vector<const Question*> questions_for(const ContentBank& bank, std::string_view process,
                                           Role role, CapabilityLevel target) {
  return filter_questions(bank, process, target,
                          [role](const Question& q) { return q.has_role(role); });
}

std::vector<const Question*> questions_for_process(const ContentBank& bank,
                                                   std::string_view process,
                                                   CapabilityLevel target) {
  return filter_questions(bank, process, target, [](const Question&) { return true; });
}

BankStats bank_stats(const ContentBank& bank) {
  BankStats stats;
  stats.processes = bank.processes().size();
  stats.knowledge_items = bank.knowledge_items().size();
  for (const auto& p : bank.processes()) {
    stats.per_process[p.id] = 0;
  }
  for (const auto& q : bank.questions()) {
    ++stats.total_questions;
    if (q.process) {
      ++stats.process_specific;
      ++stats.per_process[*q.process];
    } else {
      ++stats.generic;
    }
    ++stats.per_attribute[index_of(q.attribute)];
    for (auto role : q.roles) {
      ++stats.per_role[static_cast<std::size_t>(role)];
    }
    if (q.knowledge_item) {
      ++stats.questions_with_items;
    } else {
      ++stats.questions_without_items;
      stats.missing_items.push_back(q.id);
    }
  }
  return stats;
}

json to_json(const BankStats& stats) {
  json per_attribute = json::object();
  for (auto attribute : kAllAttributes) {
    per_attribute[std::string(to_string(attribute))] = stats.per_attribute[index_of(attribute)];
  }
  json per_role = json::object();
  for (auto role : kAllRoles) {
    per_role[std::string(to_string(role))] = stats.per_role[static_cast<std::size_t>(role)];
  }
  return json{{"processes", stats.processes},
              {"total_questions", stats.total_questions},
              {"process_specific_questions", stats.process_specific},
              {"generic_questions", stats.generic},
              {"knowledge_items", stats.knowledge_items},
              {"questions_with_items", stats.questions_with_items},
              {"questions_without_items", stats.questions_without_items},
              {"per_process", stats.per_process},
              {"per_attribute", std::move(per_attribute)},
              {"per_role", std::move(per_role)},
              {"missing_items", stats.missing_items}};
}

}  // namespace smpa
