#pragma once

#include <stdexcept>
#include <string>

namespace rayfield {

enum class ErrorCode {
  kInvalidArgument,
  kUnsupportedDegree,
  kMixedFieldTypes,
  kMissingBankEntry,
  kEmptyNeighborhood,
  kGridMismatch,
  kNonMonotone,
  kInternalConsistency,
  kParse,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rayfield
