#pragma once

#include <chrono>
#include <cstddef>
#include <ctime>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "parcorp/error.hpp"
#include "parcorp/text.hpp"

namespace nlohmann {

template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& v) {
    if (v) {
      j = *v;
    } else {
      j = nullptr;
    }
  }
  static void from_json(const json& j, std::optional<T>& v) {
    if (j.is_null()) {
      v.reset();
    } else {
      v = j.get<T>();
    }
  }
};

}  // namespace nlohmann

namespace parcorp {

using json = nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(Lang, {{Lang::EN, "en"}, {Lang::OM, "om"}})

enum class Origin { DocumentAligned, Crowdsourced, Imported };
NLOHMANN_JSON_SERIALIZE_ENUM(Origin, {{Origin::DocumentAligned, "document_aligned"},
                                      {Origin::Crowdsourced, "crowdsourced"},
                                      {Origin::Imported, "imported"}})

enum class Status { Pending, Verified, Rejected };
NLOHMANN_JSON_SERIALIZE_ENUM(Status, {{Status::Pending, "pending"},
                                      {Status::Verified, "verified"},
                                      {Status::Rejected, "rejected"}})

inline bool is_terminal(Status s) { return s != Status::Pending; }

// One sentence-level unit of text in one language.
struct Segment {
  std::string id;
  Lang lang = Lang::EN;
  std::string raw;
  std::string normalized;
  std::string source_doc;
  std::size_t position = 0;

  bool operator==(const Segment&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Segment, id, lang, raw, normalized, source_doc, position)

inline Segment make_segment(std::string id, Lang lang, std::string raw,
                            std::string source_doc, std::size_t position) {
  Segment seg;
  seg.id = std::move(id);
  seg.lang = lang;
  seg.normalized = normalize_text(raw, lang);
  seg.raw = std::move(raw);
  seg.source_doc = std::move(source_doc);
  seg.position = position;
  return seg;
}

struct SegmentPair {
  std::string id;
  Segment src;
  Segment tgt;
  Origin origin = Origin::Imported;
  Status status = Status::Pending;
  std::string created_at;

  bool operator==(const SegmentPair&) const = default;

  const Segment& side(Lang lang) const { return src.lang == lang ? src : tgt; }
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SegmentPair, id, src, tgt, origin, status, created_at)

using Clock = std::function<std::string()>;

// UTC, second resolution, ISO-8601.
inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace parcorp
