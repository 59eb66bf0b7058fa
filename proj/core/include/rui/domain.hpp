#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rui/error.hpp"
#include "rui/time.hpp"

namespace rui {

// WGS-84 coordinate in decimal degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

// -90 <= lat <= 90 and -180 <= lon < 180, both finite.
bool is_valid(GeoPoint p);

enum class IncidentKind { Accident, Construction, Landslide, RoadRepair, Obstruction, Other };

std::span<const IncidentKind> all_incident_kinds();
// Stable wire slug, e.g. "road_repair".
std::string_view to_string(IncidentKind kind);
std::string_view display_name(IncidentKind kind);
// Accepts slugs, display names and the common aliases a report form sends
// ("Car Accident", "Road Construction", ...). Case-insensitive.
std::optional<IncidentKind> parse_incident_kind(std::string_view text);

enum class ReportState { Pending, Approved, Denied };

std::string_view to_string(ReportState state);
std::optional<ReportState> parse_report_state(std::string_view text);

enum class ModerationAction { Approve, Deny };

std::string_view to_string(ModerationAction action);
std::optional<ModerationAction> parse_moderation_action(std::string_view text);

struct Attachment {
  std::string content_hash;  // lowercase hex SHA-256 of the stored bytes
  std::string media_type;    // image/jpeg or image/png
  std::uint64_t byte_size = 0;

  bool operator==(const Attachment&) const = default;
};

struct RoadUpdate {
  std::string id;
  std::string title;
  IncidentKind kind = IncidentKind::Other;
  std::string kind_label;  // free text, required (and only kept) for Other
  std::string address;
  std::string description;
  GeoPoint location;
  std::vector<Attachment> attachments;
  std::optional<std::string> reporter;
  Timestamp submitted_at;
  ReportState state = ReportState::Pending;
  std::optional<Timestamp> decided_at;

  bool operator==(const RoadUpdate&) const = default;
};

struct ModerationEvent {
  std::string report_id;
  std::string actor;
  ModerationAction action = ModerationAction::Approve;
  std::string reason;
  Timestamp at;

  bool operator==(const ModerationEvent&) const = default;
};

inline constexpr std::size_t kMaxTitleChars = 140;
inline constexpr std::size_t kMaxDescriptionChars = 2000;
inline constexpr std::size_t kMaxAddressChars = 300;
inline constexpr std::size_t kMaxReporterChars = 100;
inline constexpr std::size_t kMaxKindLabelChars = 60;
inline constexpr std::size_t kMaxAttachments = 5;

enum class FieldErrorCode {
  MissingField,
  FieldTooLong,
  CoordinateOutOfRange,
  UnknownIncidentKind,
  InvalidFormat,
};

std::string_view to_string(FieldErrorCode code);

struct FieldError {
  std::string field;
  FieldErrorCode code;
  std::string message;

  bool operator==(const FieldError&) const = default;
};

// Carries every field-level problem found in a draft, never just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<FieldError> errors);

  const std::vector<FieldError>& errors() const noexcept { return errors_; }
  bool has(std::string_view field, FieldErrorCode code) const;

 private:
  std::vector<FieldError> errors_;
};

// Checks an untrusted draft (the report form's field set) and returns every
// problem found. Server-assigned keys in the draft (id, state, timestamps,
// attachments) are ignored.
std::vector<FieldError> check_draft(const nlohmann::json& draft,
                                    std::size_t attachment_count = 0);

// Builds a Pending RoadUpdate from a draft or throws ValidationError with the
// complete error list. Strings are stored trimmed.
RoadUpdate validate_report(const nlohmann::json& draft, std::string id,
                           Timestamp now,
                           std::vector<Attachment> attachments = {});

struct Decision {
  RoadUpdate update;
  ModerationEvent event;
};

// Applies an admin decision to a Pending report. Throws AlreadyDecided for a
// terminal report and MissingDenyReason for a Deny with a blank reason.
// decided_at is never earlier than submitted_at.
Decision transition(const RoadUpdate& update, ModerationAction action,
                    std::string_view actor, std::string_view reason,
                    Timestamp now);

inline bool publicly_visible(const RoadUpdate& update) {
  return update.state == ReportState::Approved;
}

// Canonical flat JSON form shared by the wire protocol, storage and fixtures.
nlohmann::json to_json(const RoadUpdate& update);
nlohmann::json to_json(const ModerationEvent& event);
nlohmann::json to_json(const Attachment& attachment);
nlohmann::json to_json(GeoPoint p);

// Strict decoders for trusted canonical data (storage, snapshots). Throw
// Error(InvalidArgument) on malformed input.
RoadUpdate road_update_from_json(const nlohmann::json& j);
ModerationEvent moderation_event_from_json(const nlohmann::json& j);
Attachment attachment_from_json(const nlohmann::json& j);

// Counts UTF-8 code points.
std::size_t utf8_length(std::string_view s);
std::string trim(std::string_view s);

}  // namespace rui
