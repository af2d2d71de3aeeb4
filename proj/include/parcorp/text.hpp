#pragma once

// Deterministic text pipeline for English and Afaan Oromo: normalization,
// tokenization and rule-based sentence splitting.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "parcorp/error.hpp"

namespace parcorp {

enum class Lang { EN, OM };

inline std::string_view to_string(Lang lang) {
  return lang == Lang::EN ? "en" : "om";
}

inline Lang other(Lang lang) { return lang == Lang::EN ? Lang::OM : Lang::EN; }

inline Lang parse_lang(std::string_view code) {
  if (code == "en" || code == "EN") return Lang::EN;
  if (code == "om" || code == "OM") return Lang::OM;
  throw Error(ErrorKind::InvalidArgument, "unknown_language",
              "unknown language code '" + std::string(code) + "'");
}

inline bool valid_utf8(std::string_view text) {
  const auto* data = reinterpret_cast<const uint8_t*>(text.data());
  const auto len = static_cast<int32_t>(text.size());
  for (int32_t i = 0; i < len;) {
    UChar32 cp = 0;
    U8_NEXT(data, i, len, cp);
    if (cp < 0) return false;
  }
  return true;
}

namespace detail {

inline UChar32 map_quote(UChar32 cp) {
  switch (cp) {
    case 0x2018: case 0x2019: case 0x201A: case 0x201B:
    case 0x2032: case 0x02BC:
      return U'\'';
    case 0x201C: case 0x201D: case 0x201E: case 0x201F:
    case 0x2033:
      return U'"';
    default:
      return cp;
  }
}

inline std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Splits on runs of ASCII spaces; normalized text contains no other
// whitespace.
inline std::vector<std::string_view> split_spaces(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) parts.push_back(text.substr(i, j - i));
    i = j;
  }
  return parts;
}

inline bool is_detachable(char c) {
  constexpr std::string_view kPunct = ".,;:!?\"()[]";
  return kPunct.find(c) != std::string_view::npos;
}

}  // namespace detail

/// Canonical cleaned form of raw text: NFC, control and format characters
/// removed, whitespace runs collapsed to one space and trimmed, typographic
/// quotes mapped to ASCII. Case is preserved. Idempotent.
inline std::string normalize_text(std::string_view raw, Lang /*lang*/ = Lang::EN) {
  const icu::UnicodeString input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));

  // Character-level cleanup runs before composition so that removing a
  // control character between a base and a combining mark cannot leave an
  // uncomposed pair behind.
  icu::UnicodeString cleaned;
  for (int32_t i = 0; i < input.length();) {
    const UChar32 cp = input.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isUWhiteSpace(cp)) {
      cleaned.append(static_cast<UChar32>(U' '));
      continue;
    }
    const auto type = static_cast<UCharCategory>(u_charType(cp));
    if (type == U_CONTROL_CHAR || type == U_FORMAT_CHAR) continue;
    cleaned.append(detail::map_quote(cp));
  }

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString composed =
      U_SUCCESS(status) ? nfc->normalize(cleaned, status) : cleaned;
  if (U_FAILURE(status)) composed = cleaned;

  std::string out;
  const std::string utf8 = detail::to_utf8(composed);
  for (auto part : detail::split_spaces(utf8)) {
    if (!out.empty()) out.push_back(' ');
    out.append(part);
  }
  return out;
}

/// Whitespace tokenization with leading/trailing punctuation detached.
/// Apostrophes are never split off, so glottal-stop words like ba'e stay
/// whole.
inline std::vector<std::string> tokenize(std::string_view text, Lang /*lang*/ = Lang::EN) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < text.size();) {
    // Split on any ASCII whitespace so the function tolerates unnormalized
    // input.
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view chunk = text.substr(i, j - i);
    i = j;
    if (chunk.empty()) continue;

    std::size_t lo = 0;
    std::size_t hi = chunk.size();
    while (lo < hi && detail::is_detachable(chunk[lo])) {
      tokens.emplace_back(1, chunk[lo]);
      ++lo;
    }
    std::vector<std::string> trailing;
    while (hi > lo && detail::is_detachable(chunk[hi - 1])) {
      trailing.emplace_back(1, chunk[hi - 1]);
      --hi;
    }
    if (hi > lo) tokens.emplace_back(chunk.substr(lo, hi - lo));
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
  }
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

/// normalize, tokenize, re-join: the one-sentence-per-line bitext form.
inline std::string canonical_line(std::string_view raw, Lang lang) {
  return join(tokenize(normalize_text(raw, lang), lang));
}

inline const std::vector<std::string>& abbreviations(Lang lang) {
  static const std::vector<std::string> en = {"Mr.", "Mrs.", "Dr.", "e.g.", "i.e."};
  static const std::vector<std::string> om = {"kkf."};
  return lang == Lang::EN ? en : om;
}

/// Rule-based sentence splitter over normalized text. Splits after . ! ?
/// (plus any closing quotes/brackets) when followed by a space and an
/// uppercase letter. Joining the result with single spaces gives the input
/// back.
inline std::vector<std::string> sentence_split(std::string_view document, Lang lang) {
  std::vector<std::string> sentences;
  const auto& abbrev = abbreviations(lang);
  std::size_t start = 0;
  for (std::size_t i = 0; i < document.size(); ++i) {
    const char c = document[i];
    if (c != '.' && c != '!' && c != '?') continue;

    std::size_t end = i + 1;  // one past the sentence's last byte
    while (end < document.size() &&
           (document[end] == '"' || document[end] == '\'' ||
            document[end] == ')' || document[end] == ']')) {
      ++end;
    }
    if (end >= document.size()) break;  // final sentence, handled below
    if (document[end] != ' ' || end + 1 >= document.size()) continue;

    UChar32 next = 0;
    int32_t offset = static_cast<int32_t>(end + 1);
    U8_NEXT(reinterpret_cast<const uint8_t*>(document.data()), offset,
            static_cast<int32_t>(document.size()), next);
    if (next < 0 || !(u_isupper(next) || u_istitle(next))) continue;

    if (c == '.') {
      const std::size_t word_begin = document.rfind(' ', i);
      const std::size_t from = word_begin == std::string_view::npos ? 0 : word_begin + 1;
      const std::string_view word = document.substr(from, i + 1 - from);
      if (std::find(abbrev.begin(), abbrev.end(), word) != abbrev.end()) continue;
    }

    sentences.emplace_back(document.substr(start, end - start));
    start = end + 1;
    i = end;
  }
  if (start < document.size()) sentences.emplace_back(document.substr(start));
  return sentences;
}

/// Unicode case folding.
inline std::string casefold(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.foldCase();
  return detail::to_utf8(u);
}

inline std::string lowercase(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.toLower(icu::Locale::getRoot());
  return detail::to_utf8(u);
}

inline std::string collapse_whitespace(std::string_view text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      if (!out.empty()) out.push_back(' ');
      out.append(text.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

}  // namespace parcorp
