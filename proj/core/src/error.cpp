#include "rui/error.hpp"

namespace rui {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ValidationFailed: return "ValidationErrors";
    case ErrorCode::AlreadyDecided: return "AlreadyDecided";
    case ErrorCode::MissingDenyReason: return "MissingDenyReason";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::PrecisionOutOfRange: return "PrecisionOutOfRange";
    case ErrorCode::AttachmentTooLarge: return "AttachmentTooLarge";
    case ErrorCode::UnsupportedMediaType: return "UnsupportedMediaType";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::ConflictDetected: return "ConflictDetected";
    case ErrorCode::BadCursor: return "BadCursor";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::OutOfScale: return "OutOfScale";
    case ErrorCode::UnknownSubCharacteristic: return "UnknownSubCharacteristic";
    case ErrorCode::EmptySubCharacteristic: return "EmptySubCharacteristic";
    case ErrorCode::DuplicateResponse: return "DuplicateResponse";
    case ErrorCode::WrongItemCount: return "WrongItemCount";
  }
  return "Unknown";
}

}  // namespace rui
