#include "vloc/error.h"

namespace vloc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateDescriptor: return "degenerate-descriptor";
    case ErrorCode::kFrameTooSmall: return "frame-too-small";
    case ErrorCode::kEmptyCandidates: return "empty-candidate-set";
    case ErrorCode::kNoMatch: return "no-match";
    case ErrorCode::kMissingFile: return "missing-file";
    case ErrorCode::kCountMismatch: return "count-mismatch";
    case ErrorCode::kMalformedLine: return "malformed-line";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kHeaderMismatch: return "header-mismatch";
    case ErrorCode::kDuplicateFrameId: return "duplicate-frame-id";
    case ErrorCode::kUnreadableFile: return "unreadable-file";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported-version";
    case ErrorCode::kTruncatedFile: return "truncated-file";
    case ErrorCode::kCorruptFile: return "corrupt-file";
    case ErrorCode::kSingularInnovation: return "singular-innovation";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kMissingTruth: return "missing-truth";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace vloc
