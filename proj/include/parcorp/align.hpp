#pragma once

// Length-based dynamic-programming sentence alignment of a document pair,
// and conversion of the resulting links into filtered sentence pairs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/utf8.h>

#include "parcorp/error.hpp"
#include "parcorp/filter.hpp"
#include "parcorp/types.hpp"

namespace parcorp::aligner {

enum class LinkKind { OneOne, OneZero, ZeroOne, TwoOne, OneTwo, TwoTwo };
NLOHMANN_JSON_SERIALIZE_ENUM(LinkKind, {{LinkKind::OneOne, "1-1"},
                                        {LinkKind::OneZero, "1-0"},
                                        {LinkKind::ZeroOne, "0-1"},
                                        {LinkKind::TwoOne, "2-1"},
                                        {LinkKind::OneTwo, "1-2"},
                                        {LinkKind::TwoTwo, "2-2"}})

inline constexpr std::array<LinkKind, 6> kAllKinds = {
    LinkKind::OneOne, LinkKind::OneZero, LinkKind::ZeroOne,
    LinkKind::TwoOne, LinkKind::OneTwo,  LinkKind::TwoTwo};

struct KindShape {
  std::size_t src;
  std::size_t tgt;
};

constexpr KindShape shape(LinkKind k) {
  switch (k) {
    case LinkKind::OneOne: return {1, 1};
    case LinkKind::OneZero: return {1, 0};
    case LinkKind::ZeroOne: return {0, 1};
    case LinkKind::TwoOne: return {2, 1};
    case LinkKind::OneTwo: return {1, 2};
    case LinkKind::TwoTwo: return {2, 2};
  }
  return {0, 0};
}

constexpr LinkKind transpose(LinkKind k) {
  switch (k) {
    case LinkKind::OneZero: return LinkKind::ZeroOne;
    case LinkKind::ZeroOne: return LinkKind::OneZero;
    case LinkKind::TwoOne: return LinkKind::OneTwo;
    case LinkKind::OneTwo: return LinkKind::TwoOne;
    default: return k;
  }
}

inline std::string_view to_string(LinkKind k) {
  switch (k) {
    case LinkKind::OneOne: return "1-1";
    case LinkKind::OneZero: return "1-0";
    case LinkKind::ZeroOne: return "0-1";
    case LinkKind::TwoOne: return "2-1";
    case LinkKind::OneTwo: return "1-2";
    case LinkKind::TwoTwo: return "2-2";
  }
  return "?";
}

// Half-open range of sentence indices.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

struct AlignLink {
  Span src;
  Span tgt;
  LinkKind kind = LinkKind::OneOne;
  double cost = 0.0;  // this link's step cost

  bool operator==(const AlignLink&) const = default;
};

struct AlignmentParams {
  double mean_ratio = 1.0;  // expected target chars per source char
  double variance = 6.8;    // per source character
  // Indexed by LinkKind. The stock weights are rescaled to sum to one.
  std::array<double, 6> priors = normalized({0.89, 0.0099, 0.0099, 0.0445, 0.0445, 0.011});
  double max_cost = 25.0;

  static std::array<double, 6> normalized(std::array<double, 6> w) {
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    return w;
  }

  double prior(LinkKind k) const { return priors[static_cast<std::size_t>(k)]; }

  void validate() const {
    if (!(mean_ratio > 0.0) || !(variance > 0.0) || !(max_cost > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "invalid_alignment_params");
    }
    double sum = 0.0;
    for (double p : priors) {
      if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid_alignment_priors");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "invalid_alignment_priors",
                  "link priors must sum to 1");
    }
  }

  bool operator==(const AlignmentParams&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AlignmentParams, mean_ratio, variance, priors,
                                                max_cost)

/// Match cost of a span pair from character counts: the negative log of the
/// two-tailed normal probability of the observed length deviation, clamped
/// to params.max_cost.
inline double length_cost(double src_chars, double tgt_chars, const AlignmentParams& params) {
  if (src_chars < 0.0 || tgt_chars < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "negative_length");
  }
  const double scale = std::sqrt(std::max(src_chars, 1.0) * params.variance);
  const double delta = (tgt_chars - src_chars * params.mean_ratio) / scale;
  const double prob = std::erfc(std::abs(delta) / std::sqrt(2.0));
  if (!(prob > 0.0)) return params.max_cost;
  return std::min(-std::log(prob), params.max_cost);
}

/// Cost of one DP step: length cost of the spans plus the kind's prior.
inline double step_cost(LinkKind kind, double src_chars, double tgt_chars,
                        const AlignmentParams& params) {
  return length_cost(src_chars, tgt_chars, params) - std::log(params.prior(kind));
}

inline double total_cost(std::span<const AlignLink> links) {
  double total = 0.0;
  for (const auto& l : links) total += l.cost;
  return total;
}

/// Minimum-cost monotone alignment over sentence character lengths. Ties go
/// to the kind listed first in LinkKind.
inline std::vector<AlignLink> align_lengths(std::span<const std::size_t> src,
                                            std::span<const std::size_t> tgt,
                                            const AlignmentParams& params = {}) {
  params.validate();
  const std::size_t n = src.size();
  const std::size_t m = tgt.size();
  const std::size_t width = m + 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> best((n + 1) * width, kInf);
  std::vector<LinkKind> back((n + 1) * width, LinkKind::OneOne);
  std::vector<double> step((n + 1) * width, 0.0);
  best[0] = 0.0;

  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      double& cell = best[i * width + j];
      for (LinkKind kind : kAllKinds) {
        const auto [ds, dt] = shape(kind);
        if (ds > i || dt > j) continue;
        const double prev = best[(i - ds) * width + (j - dt)];
        if (prev == kInf) continue;
        std::size_t ls = 0;
        for (std::size_t k = i - ds; k < i; ++k) ls += src[k];
        std::size_t lt = 0;
        for (std::size_t k = j - dt; k < j; ++k) lt += tgt[k];
        const double sc = step_cost(kind, static_cast<double>(ls), static_cast<double>(lt), params);
        if (prev + sc < cell) {
          cell = prev + sc;
          back[i * width + j] = kind;
          step[i * width + j] = sc;
        }
      }
    }
  }

  std::vector<AlignLink> links;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const LinkKind kind = back[i * width + j];
    const auto [ds, dt] = shape(kind);
    links.push_back({{i - ds, i}, {j - dt, j}, kind, step[i * width + j]});
    i -= ds;
    j -= dt;
  }
  std::reverse(links.begin(), links.end());
  return links;
}

/// Number of Unicode code points.
inline std::size_t char_length(std::string_view text) {
  std::size_t count = 0;
  for (int32_t i = 0; i < static_cast<int32_t>(text.size());) {
    UChar32 cp = 0;
    U8_NEXT(reinterpret_cast<const uint8_t*>(text.data()), i,
            static_cast<int32_t>(text.size()), cp);
    ++count;
  }
  return count;
}

inline std::vector<AlignLink> align(std::span<const std::string> src_sentences,
                                    std::span<const std::string> tgt_sentences,
                                    const AlignmentParams& params = {}) {
  std::vector<std::size_t> src;
  std::vector<std::size_t> tgt;
  for (const auto& s : src_sentences) src.push_back(char_length(s));
  for (const auto& t : tgt_sentences) tgt.push_back(char_length(t));
  return align_lengths(src, tgt, params);
}

struct DropReport {
  std::size_t links = 0;
  std::size_t pairs = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count

  std::size_t dropped_total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
  }
};

inline void to_json(json& j, const DropReport& r) {
  j = json{{"links", r.links}, {"pairs", r.pairs}, {"dropped", r.dropped}};
}

// Provenance for pairs emitted from one aligned document pair.
struct EmitContext {
  std::string doc_id;
  Lang src_lang = Lang::EN;
  std::string created_at;
};

struct EmitResult {
  std::vector<SegmentPair> pairs;
  DropReport report;
};

/// Turns alignment links into DocumentAligned pairs: unmatched links are
/// dropped, multi-sentence spans are joined with a space and every surviving
/// pair must pass the filter.
inline EmitResult emit_pairs(std::span<const AlignLink> links,
                             std::span<const std::string> src_sentences,
                             std::span<const std::string> tgt_sentences,
                             const FilterRule& rules, const EmitContext& ctx) {
  auto joined = [](std::span<const std::string> sentences, Span span) {
    std::string out;
    for (std::size_t k = span.begin; k < span.end; ++k) {
      if (k > span.begin) out.push_back(' ');
      out += sentences[k];
    }
    return out;
  };

  EmitResult result;
  result.report.links = links.size();
  const Lang tgt_lang = other(ctx.src_lang);
  for (const auto& link : links) {
    if (link.src.end > src_sentences.size() || link.tgt.end > tgt_sentences.size()) {
      throw Error(ErrorKind::InvalidArgument, "link_out_of_range");
    }
    if (link.src.size() == 0 || link.tgt.size() == 0) {
      ++result.report.dropped["unmatched"];
      continue;
    }
    SegmentPair pair;
    pair.id = ctx.doc_id + ":" + std::to_string(link.src.begin) + "-" +
              std::to_string(link.tgt.begin);
    const std::string src_doc = ctx.doc_id + ":" + std::string(to_string(ctx.src_lang));
    const std::string tgt_doc = ctx.doc_id + ":" + std::string(to_string(tgt_lang));
    pair.src = make_segment(src_doc + ":" + std::to_string(link.src.begin), ctx.src_lang,
                            joined(src_sentences, link.src), src_doc, link.src.begin);
    pair.tgt = make_segment(tgt_doc + ":" + std::to_string(link.tgt.begin), tgt_lang,
                            joined(tgt_sentences, link.tgt), tgt_doc, link.tgt.begin);
    pair.origin = Origin::DocumentAligned;
    pair.status = Status::Pending;
    pair.created_at = ctx.created_at;

    const auto decision = filter_pair(pair, rules);
    if (!decision.keep()) {
      ++result.report.dropped[std::string(to_string(*decision.drop))];
      continue;
    }
    result.pairs.push_back(std::move(pair));
  }
  result.report.pairs = result.pairs.size();
  return result;
}

}  // namespace parcorp::aligner
