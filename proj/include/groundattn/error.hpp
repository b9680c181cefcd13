#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace groundattn {

enum class ErrorCode {
  kMalformedHeader,
  kUnsupportedTensor,
  kTruncatedFile,
  kShapeMismatch,
  kMissingFile,
  kMalformedManifest,
  kInvariantViolation,
  kUnknownResolution,
  kEmptyTrace,
  kEmptyStack,
  kResolutionMismatch,
  kAllZeroAttention,
  kEmptyMap,
  kInvalidArgument,
  kFixtureSpec,
  kEmptyRecords,
  kEmptyDataset,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure the library reports on bad input. `sample_id` and `stage`
// are filled in by whoever has that context (the loader, the pipeline).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }
  const std::string& sample_id() const { return sample_id_; }
  const std::string& stage() const { return stage_; }

  Error with_sample(std::string sample_id) const;
  Error with_stage(std::string stage) const;

 private:
  void rebuild_message();

  ErrorCode code_;
  std::string detail_;
  std::string sample_id_;
  std::string stage_;
  std::string message_;

 public:
  const char* what() const noexcept override { return message_.c_str(); }
};

}  // namespace groundattn
