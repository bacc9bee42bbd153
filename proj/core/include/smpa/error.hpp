#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smpa {

enum class ErrorCode {
  ParseError,
  ValidationError,
  VersionError,
  OutOfRange,
  UnknownProcess,
  UnknownAssessment,
  UnknownParticipant,
  NotFound,
  EmptyProcessList,
  InvalidState,
  DuplicateRoleForProcess,
  AuthError,
  NotAllocated,
  MixedQuestionIds,
  MixedAttributes,
  MissingAttribute,
  BankMismatch,
  IncompleteResults,
  UnsupportedFormat,
  EmptyInput,
  MismatchedProcessSets,
  InvalidWeights,
  StoreLocked,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every domain failure is reported through this type. `path` addresses the
// offending element of an input document (e.g. "questions[12].roles") and is
// empty when the error is not tied to a document location.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string path_;
};

}  // namespace smpa
