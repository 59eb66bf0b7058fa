#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rui {

enum class ErrorCode {
  InvalidArgument,
  ValidationFailed,
  AlreadyDecided,
  MissingDenyReason,
  NotFound,
  UnknownId,
  PrecisionOutOfRange,
  AttachmentTooLarge,
  UnsupportedMediaType,
  StorageFailure,
  ConflictDetected,
  BadCursor,
  ProviderUnavailable,
  OutOfScale,
  UnknownSubCharacteristic,
  EmptySubCharacteristic,
  DuplicateResponse,
  WrongItemCount,
};

std::string_view to_string(ErrorCode code);

// Base of every error raised by the library. The code is what callers branch
// on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rui
