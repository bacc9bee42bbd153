#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "smpa/bank.hpp"
#include "smpa/crypto.hpp"
#include "smpa/survey.hpp"

namespace smpa::testing {

inline const std::filesystem::path kSampleBank = SMPA_SAMPLE_BANK;
inline const std::filesystem::path kSourceDir = SMPA_SOURCE_DIR;

inline std::shared_ptr<const ContentBank> sample_bank() {
  static auto bank = std::make_shared<const ContentBank>(ContentBank::load_file(kSampleBank));
  return bank;
}

inline constexpr const char* kNow = "2024-06-11T09:00:00Z";

// Fresh, empty directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("smpa-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Participant& add_participant(Assessment& a, const ContentBank& bank, std::string name,
                                    std::vector<Assignment> assignments) {
  register_participant(a, bank, std::move(name), std::move(assignments),
                       sha256_hex(random_token()));
  return a.participants.back();
}

// Open assessment over the given processes with one participant per
// (process, role) pair.
inline Assessment staffed_assessment(const ContentBank& bank, std::vector<std::string> processes,
                                     CapabilityLevel target = CapabilityLevel::CL5) {
  auto a = create_assessment(bank, "t", "test org", processes, target, kNow);
  for (const auto& p : processes) {
    for (auto role : kAllRoles) {
      add_participant(a, bank, p + "-" + std::string(to_string(role)), {{p, role}});
    }
  }
  open_assessment(a, kNow);
  return a;
}

// Answers every allocated question of every participant with `answer`.
inline void answer_all(Assessment& a, const ContentBank& bank, AnswerOption answer) {
  for (const auto& p : a.participants) {
    for (const auto& q : allocate_questionnaire(a, bank, p.id)) {
      submit_response(a, bank, p.id, q.process, q.question->id, answer, kNow);
    }
  }
}

}  // namespace smpa::testing
