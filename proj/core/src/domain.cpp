#include "rui/domain.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace rui {

using nlohmann::json;

namespace {

constexpr std::array kKinds = {IncidentKind::Accident,   IncidentKind::Construction,
                               IncidentKind::Landslide,  IncidentKind::RoadRepair,
                               IncidentKind::Obstruction, IncidentKind::Other};

std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (c == '_' || c == '-') {
      out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  return out;
}

struct KindAlias {
  std::string_view text;
  IncidentKind kind;
};

// Normalized (lowercase, '_'/'-' as space) names accepted from report forms.
constexpr std::array kKindAliases = {
    KindAlias{"accident", IncidentKind::Accident},
    KindAlias{"car accident", IncidentKind::Accident},
    KindAlias{"vehicular accident", IncidentKind::Accident},
    KindAlias{"road accident", IncidentKind::Accident},
    KindAlias{"construction", IncidentKind::Construction},
    KindAlias{"road construction", IncidentKind::Construction},
    KindAlias{"bridge construction", IncidentKind::Construction},
    KindAlias{"landslide", IncidentKind::Landslide},
    KindAlias{"road repair", IncidentKind::RoadRepair},
    KindAlias{"roadrepair", IncidentKind::RoadRepair},
    KindAlias{"obstruction", IncidentKind::Obstruction},
    KindAlias{"road obstruction", IncidentKind::Obstruction},
    KindAlias{"other", IncidentKind::Other},
};

// Reads a coordinate given as a JSON number or a numeric string.
std::optional<double> read_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    auto s = trim(v.get_ref<const std::string&>());
    if (s.empty()) return std::nullopt;
    double d = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return d;
  }
  return std::nullopt;
}

struct Checker {
  std::vector<FieldError> errors;

  void add(std::string field, FieldErrorCode code, std::string message) {
    errors.push_back({std::move(field), code, std::move(message)});
  }

  // Required trimmed text field; returns the trimmed value when usable.
  std::optional<std::string> required_text(const json& draft, const char* field,
                                           std::size_t max_chars) {
    auto it = draft.find(field);
    if (it == draft.end() || it->is_null()) {
      add(field, FieldErrorCode::MissingField, std::string(field) + " is required");
      return std::nullopt;
    }
    if (!it->is_string()) {
      add(field, FieldErrorCode::InvalidFormat, std::string(field) + " must be text");
      return std::nullopt;
    }
    auto value = trim(it->get_ref<const std::string&>());
    if (value.empty()) {
      add(field, FieldErrorCode::MissingField, std::string(field) + " is required");
      return std::nullopt;
    }
    if (utf8_length(value) > max_chars) {
      add(field, FieldErrorCode::FieldTooLong,
          std::string(field) + " exceeds " + std::to_string(max_chars) + " characters");
      return std::nullopt;
    }
    return value;
  }

  std::optional<std::string> optional_text(const json& draft, const char* field,
                                           std::size_t max_chars) {
    auto it = draft.find(field);
    if (it == draft.end() || it->is_null()) return std::string{};
    if (!it->is_string()) {
      add(field, FieldErrorCode::InvalidFormat, std::string(field) + " must be text");
      return std::nullopt;
    }
    auto value = trim(it->get_ref<const std::string&>());
    if (utf8_length(value) > max_chars) {
      add(field, FieldErrorCode::FieldTooLong,
          std::string(field) + " exceeds " + std::to_string(max_chars) + " characters");
      return std::nullopt;
    }
    return value;
  }

  std::optional<double> coordinate(const json& location, const char* key, double lo,
                                   double hi, bool hi_inclusive) {
    std::string field = std::string("location.") + key;
    auto it = location.find(key);
    if (it == location.end() || it->is_null()) {
      add(field, FieldErrorCode::MissingField, field + " is required");
      return std::nullopt;
    }
    auto v = read_number(*it);
    if (!v) {
      add(field, FieldErrorCode::InvalidFormat, field + " must be a decimal number");
      return std::nullopt;
    }
    bool in_range = std::isfinite(*v) && *v >= lo && (hi_inclusive ? *v <= hi : *v < hi);
    if (!in_range) {
      add(field, FieldErrorCode::CoordinateOutOfRange, field + " is out of range");
      return std::nullopt;
    }
    return v;
  }
};

struct Parsed {
  std::string title;
  IncidentKind kind = IncidentKind::Other;
  std::string kind_label;
  std::string address;
  std::string description;
  GeoPoint location;
  std::optional<std::string> reporter;
};

std::optional<Parsed> parse_draft(const json& draft, std::size_t attachment_count,
                                  std::vector<FieldError>& out) {
  Checker c;
  if (!draft.is_object()) {
    c.add("", FieldErrorCode::InvalidFormat, "report must be a JSON object");
    out = std::move(c.errors);
    return std::nullopt;
  }
  Parsed p;
  auto title = c.required_text(draft, "title", kMaxTitleChars);
  auto address = c.required_text(draft, "address", kMaxAddressChars);
  auto description = c.optional_text(draft, "description", kMaxDescriptionChars);
  auto reporter = c.optional_text(draft, "reporter", kMaxReporterChars);

  std::optional<IncidentKind> kind;
  auto kind_it = draft.find("kind");
  if (kind_it == draft.end() || kind_it->is_null() ||
      (kind_it->is_string() && trim(kind_it->get_ref<const std::string&>()).empty())) {
    c.add("kind", FieldErrorCode::MissingField, "kind is required");
  } else if (!kind_it->is_string()) {
    c.add("kind", FieldErrorCode::InvalidFormat, "kind must be text");
  } else {
    kind = parse_incident_kind(kind_it->get_ref<const std::string&>());
    if (!kind) {
      c.add("kind", FieldErrorCode::UnknownIncidentKind,
            "unknown incident kind '" + kind_it->get<std::string>() + "'");
    }
  }
  std::optional<std::string> kind_label = std::string{};
  if (kind == IncidentKind::Other) {
    kind_label = c.required_text(draft, "kind_label", kMaxKindLabelChars);
  }

  std::optional<double> lat, lon;
  auto loc_it = draft.find("location");
  if (loc_it == draft.end() || loc_it->is_null()) {
    c.add("location", FieldErrorCode::MissingField, "location is required");
  } else if (!loc_it->is_object()) {
    c.add("location", FieldErrorCode::InvalidFormat, "location must be {lat, lon}");
  } else {
    lat = c.coordinate(*loc_it, "lat", -90.0, 90.0, true);
    lon = c.coordinate(*loc_it, "lon", -180.0, 180.0, false);
  }

  if (attachment_count > kMaxAttachments) {
    c.add("attachments", FieldErrorCode::FieldTooLong,
          "at most " + std::to_string(kMaxAttachments) + " attachments are allowed");
  }

  if (!c.errors.empty()) {
    out = std::move(c.errors);
    return std::nullopt;
  }
  p.title = std::move(*title);
  p.kind = *kind;
  p.kind_label = std::move(*kind_label);
  p.address = std::move(*address);
  p.description = std::move(*description);
  p.location = {*lat, *lon};
  if (!reporter->empty()) p.reporter = std::move(*reporter);
  return p;
}

std::string string_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

Timestamp time_field(const json& j, const char* key) {
  auto t = parse_rfc3339(string_field(j, key));
  if (!t) throw Error(ErrorCode::InvalidArgument, std::string("bad timestamp in '") + key + "'");
  return *t;
}

}  // namespace

bool is_valid(GeoPoint p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon < 180.0;
}

std::span<const IncidentKind> all_incident_kinds() { return kKinds; }

std::string_view to_string(IncidentKind kind) {
  switch (kind) {
    case IncidentKind::Accident: return "accident";
    case IncidentKind::Construction: return "construction";
    case IncidentKind::Landslide: return "landslide";
    case IncidentKind::RoadRepair: return "road_repair";
    case IncidentKind::Obstruction: return "obstruction";
    case IncidentKind::Other: return "other";
  }
  return "other";
}

std::string_view display_name(IncidentKind kind) {
  switch (kind) {
    case IncidentKind::Accident: return "Accident";
    case IncidentKind::Construction: return "Construction";
    case IncidentKind::Landslide: return "Landslide";
    case IncidentKind::RoadRepair: return "Road Repair";
    case IncidentKind::Obstruction: return "Obstruction";
    case IncidentKind::Other: return "Other";
  }
  return "Other";
}

std::optional<IncidentKind> parse_incident_kind(std::string_view text) {
  auto key = lower(trim(text));
  for (const auto& alias : kKindAliases) {
    if (alias.text == key) return alias.kind;
  }
  return std::nullopt;
}

std::string_view to_string(ReportState state) {
  switch (state) {
    case ReportState::Pending: return "pending";
    case ReportState::Approved: return "approved";
    case ReportState::Denied: return "denied";
  }
  return "pending";
}

std::optional<ReportState> parse_report_state(std::string_view text) {
  auto key = lower(text);
  if (key == "pending") return ReportState::Pending;
  if (key == "approved") return ReportState::Approved;
  if (key == "denied") return ReportState::Denied;
  return std::nullopt;
}

std::string_view to_string(ModerationAction action) {
  return action == ModerationAction::Approve ? "approve" : "deny";
}

std::optional<ModerationAction> parse_moderation_action(std::string_view text) {
  auto key = lower(text);
  if (key == "approve") return ModerationAction::Approve;
  if (key == "deny") return ModerationAction::Deny;
  return std::nullopt;
}

std::string_view to_string(FieldErrorCode code) {
  switch (code) {
    case FieldErrorCode::MissingField: return "MissingField";
    case FieldErrorCode::FieldTooLong: return "FieldTooLong";
    case FieldErrorCode::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case FieldErrorCode::UnknownIncidentKind: return "UnknownIncidentKind";
    case FieldErrorCode::InvalidFormat: return "InvalidFormat";
  }
  return "InvalidFormat";
}

namespace {

std::string summarize(const std::vector<FieldError>& errors) {
  std::string msg = "report failed validation:";
  for (const auto& e : errors) {
    msg += " ";
    msg += to_string(e.code);
    msg += "(" + e.field + ")";
  }
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<FieldError> errors)
    : Error(ErrorCode::ValidationFailed, summarize(errors)), errors_(std::move(errors)) {}

bool ValidationError::has(std::string_view field, FieldErrorCode code) const {
  return std::any_of(errors_.begin(), errors_.end(),
                     [&](const FieldError& e) { return e.field == field && e.code == code; });
}

std::vector<FieldError> check_draft(const json& draft, std::size_t attachment_count) {
  std::vector<FieldError> errors;
  parse_draft(draft, attachment_count, errors);
  return errors;
}

RoadUpdate validate_report(const json& draft, std::string id, Timestamp now,
                           std::vector<Attachment> attachments) {
  std::vector<FieldError> errors;
  auto parsed = parse_draft(draft, attachments.size(), errors);
  if (!parsed) throw ValidationError(std::move(errors));

  RoadUpdate u;
  u.id = std::move(id);
  u.title = std::move(parsed->title);
  u.kind = parsed->kind;
  u.kind_label = std::move(parsed->kind_label);
  u.address = std::move(parsed->address);
  u.description = std::move(parsed->description);
  u.location = parsed->location;
  u.attachments = std::move(attachments);
  u.reporter = std::move(parsed->reporter);
  u.submitted_at = now;
  u.state = ReportState::Pending;
  return u;
}

Decision transition(const RoadUpdate& update, ModerationAction action,
                    std::string_view actor, std::string_view reason, Timestamp now) {
  if (update.state != ReportState::Pending) {
    throw Error(ErrorCode::AlreadyDecided,
                "report " + update.id + " is already " + std::string(to_string(update.state)));
  }
  auto trimmed_reason = trim(reason);
  if (action == ModerationAction::Deny && trimmed_reason.empty()) {
    throw Error(ErrorCode::MissingDenyReason, "a reason is required to deny a report");
  }
  Decision d{update, {}};
  d.update.state =
      action == ModerationAction::Approve ? ReportState::Approved : ReportState::Denied;
  d.update.decided_at = std::max(now, update.submitted_at);
  d.event.report_id = update.id;
  d.event.actor = std::string(actor);
  d.event.action = action;
  d.event.reason = std::move(trimmed_reason);
  d.event.at = *d.update.decided_at;
  return d;
}

json to_json(GeoPoint p) { return json{{"lat", p.lat}, {"lon", p.lon}}; }

json to_json(const Attachment& a) {
  return json{{"content_hash", a.content_hash},
              {"media_type", a.media_type},
              {"byte_size", a.byte_size}};
}

json to_json(const RoadUpdate& u) {
  json attachments = json::array();
  for (const auto& a : u.attachments) attachments.push_back(to_json(a));
  json j{{"id", u.id},
         {"title", u.title},
         {"kind", to_string(u.kind)},
         {"address", u.address},
         {"description", u.description},
         {"location", to_json(u.location)},
         {"attachments", std::move(attachments)},
         {"reporter", u.reporter ? json(*u.reporter) : json(nullptr)},
         {"submitted_at", format_rfc3339(u.submitted_at)},
         {"state", to_string(u.state)},
         {"decided_at", u.decided_at ? json(format_rfc3339(*u.decided_at)) : json(nullptr)}};
  if (u.kind == IncidentKind::Other) j["kind_label"] = u.kind_label;
  return j;
}

json to_json(const ModerationEvent& e) {
  return json{{"report_id", e.report_id},
              {"actor", e.actor},
              {"action", to_string(e.action)},
              {"reason", e.reason},
              {"at", format_rfc3339(e.at)}};
}

Attachment attachment_from_json(const json& j) {
  Attachment a;
  a.content_hash = string_field(j, "content_hash");
  a.media_type = string_field(j, "media_type");
  auto it = j.find("byte_size");
  if (it == j.end() || !it->is_number_unsigned()) {
    throw Error(ErrorCode::InvalidArgument, "attachment byte_size missing");
  }
  a.byte_size = it->get<std::uint64_t>();
  return a;
}

RoadUpdate road_update_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "report must be an object");
  try {
    RoadUpdate u;
    u.id = string_field(j, "id");
    u.title = string_field(j, "title");
    auto kind = parse_incident_kind(string_field(j, "kind"));
    if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown kind");
    u.kind = *kind;
    if (u.kind == IncidentKind::Other) u.kind_label = string_field(j, "kind_label");
    u.address = string_field(j, "address");
    u.description = j.value("description", std::string{});
    const auto& loc = j.at("location");
    u.location = {loc.at("lat").get<double>(), loc.at("lon").get<double>()};
    for (const auto& a : j.value("attachments", json::array())) {
      u.attachments.push_back(attachment_from_json(a));
    }
    if (auto it = j.find("reporter"); it != j.end() && it->is_string()) u.reporter = it->get<std::string>();
    u.submitted_at = time_field(j, "submitted_at");
    auto state = parse_report_state(string_field(j, "state"));
    if (!state) throw Error(ErrorCode::InvalidArgument, "unknown state");
    u.state = *state;
    if (auto it = j.find("decided_at"); it != j.end() && !it->is_null()) {
      u.decided_at = time_field(j, "decided_at");
    }
    if (u.decided_at.has_value() != (u.state != ReportState::Pending)) {
      throw Error(ErrorCode::InvalidArgument, "decided_at inconsistent with state");
    }
    return u;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
  }
}

ModerationEvent moderation_event_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "event must be an object");
  ModerationEvent e;
  e.report_id = string_field(j, "report_id");
  e.actor = string_field(j, "actor");
  auto action = parse_moderation_action(string_field(j, "action"));
  if (!action) throw Error(ErrorCode::InvalidArgument, "unknown action");
  e.action = *action;
  e.reason = j.value("reason", std::string{});
  e.at = time_field(j, "at");
  return e;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace rui
