#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vloc {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateDescriptor,
  kFrameTooSmall,
  kEmptyCandidates,
  kNoMatch,
  kMissingFile,
  kCountMismatch,
  kMalformedLine,
  kOutOfRange,
  kHeaderMismatch,
  kDuplicateFrameId,
  kUnreadableFile,
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedFile,
  kCorruptFile,
  kSingularInnovation,
  kLengthMismatch,
  kMissingTruth,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and tests) can branch on the kind of error, not the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vloc
