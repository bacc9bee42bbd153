#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "smpa/model.hpp"

namespace smpa {

inline constexpr int kBankSchemaVersion = 1;

struct KnowledgeItem {
  std::string id;
  // Template texts. "{process}" is replaced with the process name when the
  // item is rendered into a report.
  std::string observation;
  std::string recommendation;

  friend bool operator==(const KnowledgeItem&, const KnowledgeItem&) = default;
};

struct Question {
  std::string id;
  ProcessAttribute attribute = ProcessAttribute::PA1_1;
  // Set for PA1.1 questions; nullopt means the question is generic and
  // applies to every process.
  std::optional<std::string> process;
  std::string text;
  std::vector<Role> roles;
  std::optional<std::string> knowledge_item;

  bool is_generic() const noexcept { return !process.has_value(); }
  bool applies_to(std::string_view process_id) const noexcept {
    return !process || *process == process_id;
  }
  bool has_role(Role role) const noexcept;

  friend bool operator==(const Question&, const Question&) = default;
};

// Validated, immutable question bank and knowledge base.
class ContentBank {
 public:
  // Throws Error{ParseError|ValidationError|VersionError}; diagnostics carry
  // a path such as "questions[3].scope".
  static ContentBank from_json(const nlohmann::json& document);
  static ContentBank load(std::istream& in);
  static ContentBank load_file(const std::filesystem::path& path);

  nlohmann::json to_json() const;

  int schema_version() const noexcept { return schema_version_; }
  const std::vector<ProcessRef>& processes() const noexcept { return processes_; }
  const std::vector<Question>& questions() const noexcept { return questions_; }
  const std::vector<KnowledgeItem>& knowledge_items() const noexcept { return items_; }

  const ProcessRef* find_process(std::string_view id) const;
  const Question* find_question(std::string_view id) const;
  const KnowledgeItem* find_knowledge_item(std::string_view id) const;

  // Hex SHA-256 of the canonical serialization; identifies bank content.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  friend bool operator==(const ContentBank& a, const ContentBank& b) {
    return a.schema_version_ == b.schema_version_ && a.processes_ == b.processes_ &&
           a.questions_ == b.questions_ && a.items_ == b.items_;
  }

 private:
  ContentBank() = default;
  void index_and_validate();

  int schema_version_ = kBankSchemaVersion;
  std::vector<ProcessRef> processes_;
  std::vector<Question> questions_;
  std::vector<KnowledgeItem> items_;
  std::unordered_map<std::string, std::size_t> process_index_;
  std::unordered_map<std::string, std::size_t> question_index_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::string fingerprint_;
};

// Questions applicable to `process` for a respondent in `role`, up to and
// including `target`. Ordered by attribute, then question id. Pointers refer
// into `bank` and live as long as it does. Throws Error{UnknownProcess}.
std::vector<const Question*> questions_for(const ContentBank& bank, std::string_view process,
                                           Role role, CapabilityLevel target);

// Same filter without the role restriction.
std::vector<const Question*> questions_for_process(const ContentBank& bank,
                                                   std::string_view process,
                                                   CapabilityLevel target);

struct BankStats {
  std::size_t processes = 0;
  std::size_t total_questions = 0;
  std::size_t process_specific = 0;
  std::size_t generic = 0;
  std::size_t knowledge_items = 0;
  std::size_t questions_with_items = 0;
  std::size_t questions_without_items = 0;
  std::map<std::string, std::size_t> per_process;  // process-scoped questions
  std::array<std::size_t, kAttributeCount> per_attribute{};
  std::array<std::size_t, 3> per_role{};
  std::vector<std::string> missing_items;  // question ids lacking an item
};

BankStats bank_stats(const ContentBank& bank);
nlohmann::json to_json(const BankStats& stats);

}  // namespace smpa
