#include "groundattn/error.hpp"

namespace groundattn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kUnsupportedTensor: return "UnsupportedTensor";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kMalformedManifest: return "MalformedManifest";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kUnknownResolution: return "UnknownResolution";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kEmptyStack: return "EmptyStack";
    case ErrorCode::kResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::kAllZeroAttention: return "AllZeroAttention";
    case ErrorCode::kEmptyMap: return "EmptyMap";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFixtureSpec: return "FixtureSpecError";
    case ErrorCode::kEmptyRecords: return "EmptyRecords";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code), detail_(message) {
  rebuild_message();
}

Error Error::with_sample(std::string sample_id) const {
  Error copy = *this;
  copy.sample_id_ = std::move(sample_id);
  copy.rebuild_message();
  return copy;
}

Error Error::with_stage(std::string stage) const {
  Error copy = *this;
  copy.stage_ = std::move(stage);
  copy.rebuild_message();
  return copy;
}

void Error::rebuild_message() {
  message_.clear();
  if (!sample_id_.empty()) message_ += "[sample=" + sample_id_ + "] ";
  if (!stage_.empty()) message_ += "[stage=" + stage_ + "] ";
  message_ += std::string(to_string(code_)) + ": " + detail_;
}

}  // namespace groundattn
