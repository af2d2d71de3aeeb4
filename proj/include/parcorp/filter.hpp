#pragma once

// Duplicate keys and data-reduction filters for sentence pairs.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>

#include "parcorp/digest.hpp"
#include "parcorp/text.hpp"
#include "parcorp/types.hpp"

namespace parcorp {

struct FilterRule {
  std::size_t max_len_tokens = 120;
  double max_token_ratio = 3.0;
  std::size_t min_len_tokens = 1;

  void validate() const {
    if (min_len_tokens < 1 || max_len_tokens < min_len_tokens) {
      throw Error(ErrorKind::InvalidArgument, "invalid_filter_lengths");
    }
    if (!(max_token_ratio >= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "invalid_filter_ratio");
    }
  }

  bool operator==(const FilterRule&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FilterRule, max_len_tokens, max_token_ratio,
                                                min_len_tokens)

enum class DropReason { Empty, Length, Ratio };
NLOHMANN_JSON_SERIALIZE_ENUM(DropReason, {{DropReason::Empty, "empty"},
                                          {DropReason::Length, "length"},
                                          {DropReason::Ratio, "ratio"}})

inline std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::Empty: return "empty";
    case DropReason::Length: return "length";
    case DropReason::Ratio: return "ratio";
  }
  return "unknown";
}

// Keep when `drop` is empty.
struct FilterDecision {
  std::optional<DropReason> drop;

  bool keep() const { return !drop.has_value(); }
  bool operator==(const FilterDecision&) const = default;
};

/// Decision from token counts alone. Rules are checked in the fixed order
/// empty, length, ratio; the first violation is reported.
inline FilterDecision filter_counts(std::size_t src_tokens, std::size_t tgt_tokens,
                                    const FilterRule& rules) {
  if (src_tokens == 0 || tgt_tokens == 0) return {DropReason::Empty};
  const auto [shorter, longer] = std::minmax(src_tokens, tgt_tokens);
  if (longer > rules.max_len_tokens || shorter < rules.min_len_tokens) {
    return {DropReason::Length};
  }
  if (static_cast<double>(longer) / static_cast<double>(shorter) > rules.max_token_ratio) {
    return {DropReason::Ratio};
  }
  return {};
}

inline FilterDecision filter_pair(const SegmentPair& pair, const FilterRule& rules) {
  return filter_counts(tokenize(pair.src.normalized, pair.src.lang).size(),
                       tokenize(pair.tgt.normalized, pair.tgt.lang).size(), rules);
}

/// Casefolded, whitespace-collapsed text used for duplicate detection.
inline std::string dedup_form(std::string_view normalized) {
  return collapse_whitespace(casefold(normalized));
}

/// Digest over the (English side, Oromo side) dedup forms. Orientation of
/// the pair does not affect the key.
inline std::string dedup_key(std::string_view en_text, std::string_view om_text) {
  Sha256 h;
  h.update(dedup_form(en_text));
  h.update(std::string_view("\x1f", 1));
  h.update(dedup_form(om_text));
  return h.hex();
}

inline std::string dedup_key(const SegmentPair& pair) {
  return dedup_key(pair.side(Lang::EN).normalized, pair.side(Lang::OM).normalized);
}

}  // namespace parcorp
