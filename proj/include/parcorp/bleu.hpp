#pragma once

// Corpus- and sentence-level BLEU: clipped n-gram precision, brevity
// penalty and a weighted geometric mean.

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parcorp/error.hpp"
#include "parcorp/text.hpp"
#include "parcorp/types.hpp"

namespace parcorp::bleu {

using Tokens = std::vector<std::string>;
using NGram = std::vector<std::string>;
using NGramCounts = std::map<NGram, std::size_t>;

enum class CaseMode { Cased, Lowercased };
NLOHMANN_JSON_SERIALIZE_ENUM(CaseMode, {{CaseMode::Cased, "cased"},
                                        {CaseMode::Lowercased, "lowercased"}})

enum class Smoothing { None, AddEpsilon };
NLOHMANN_JSON_SERIALIZE_ENUM(Smoothing, {{Smoothing::None, "none"},
                                         {Smoothing::AddEpsilon, "add_epsilon"}})

struct BleuConfig {
  int max_n = 4;
  std::vector<double> weights;  // empty means uniform 1/max_n
  CaseMode case_mode = CaseMode::Cased;
  Smoothing smoothing = Smoothing::None;
  double epsilon = 0.1;

  static BleuConfig sentence_default() {
    BleuConfig c;
    c.smoothing = Smoothing::AddEpsilon;
    return c;
  }

  std::vector<double> effective_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(static_cast<std::size_t>(max_n), 1.0 / max_n);
  }

  void validate() const {
    if (max_n < 1 || max_n > 9) throw Error(ErrorKind::InvalidArgument, "invalid_max_n");
    if (!weights.empty()) {
      if (weights.size() != static_cast<std::size_t>(max_n)) {
        throw Error(ErrorKind::InvalidArgument, "invalid_weights", "need one weight per order");
      }
      double sum = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid_weights");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidArgument, "invalid_weights", "weights must sum to 1");
      }
    }
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid_epsilon");
  }

  bool operator==(const BleuConfig&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BleuConfig, max_n, weights, case_mode,
                                                smoothing, epsilon)

struct Precision {
  std::size_t clipped = 0;
  std::size_t total = 0;
  double value = 0.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Precision, clipped, total, value)

struct BleuReport {
  double score = 0.0;
  std::vector<Precision> precisions;  // index 0 holds unigrams
  double brevity_penalty = 1.0;
  std::size_t candidate_len = 0;
  std::size_t reference_len = 0;
  std::size_t segments = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BleuReport, score, precisions, brevity_penalty, candidate_len,
                                   reference_len, segments)

inline NGramCounts ngram_counts(std::span<const std::string> tokens, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "invalid_ngram_order");
  NGramCounts counts;
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return counts;
}

/// (clipped, total): candidate n-gram counts clipped to the largest count
/// found in any single reference.
inline std::pair<std::size_t, std::size_t> modified_precision(
    std::span<const std::string> candidate, std::span<const Tokens> references, int n) {
  if (references.empty()) throw Error(ErrorKind::InvalidArgument, "empty_reference_set");
  const NGramCounts cand = ngram_counts(candidate, n);
  std::map<NGram, std::size_t> max_ref;
  for (const auto& ref : references) {
    for (const auto& [gram, count] : ngram_counts(ref, n)) {
      auto& slot = max_ref[gram];
      slot = std::max(slot, count);
    }
  }
  std::size_t clipped = 0;
  std::size_t total = 0;
  for (const auto& [gram, count] : cand) {
    total += count;
    const auto it = max_ref.find(gram);
    if (it != max_ref.end()) clipped += std::min(count, it->second);
  }
  return {clipped, total};
}

inline double brevity_penalty(std::size_t candidate_len, std::size_t reference_len) {
  if (candidate_len == 0) throw Error(ErrorKind::InvalidArgument, "empty_candidate");
  if (candidate_len >= reference_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_len) / static_cast<double>(candidate_len));
}

/// Reference length closest to the candidate length; ties go to the shorter.
inline std::size_t effective_reference_length(std::size_t candidate_len,
                                              std::span<const Tokens> references) {
  std::size_t best = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [&](std::size_t len) {
      return len > candidate_len ? len - candidate_len : candidate_len - len;
    };
    if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best)) {
      best = ref.size();
    }
  }
  return best;
}

namespace detail {

inline Tokens apply_case(std::span<const std::string> tokens, CaseMode mode) {
  Tokens out(tokens.begin(), tokens.end());
  if (mode == CaseMode::Lowercased) {
    for (auto& t : out) t = lowercase(t);
  }
  return out;
}

}  // namespace detail

/// Corpus BLEU: clipped and total counts are summed over all segments before
/// the geometric mean and brevity penalty are applied.
inline BleuReport corpus_bleu(std::span<const Tokens> candidates,
                              std::span<const std::vector<Tokens>> references,
                              const BleuConfig& config = {}) {
  config.validate();
  if (candidates.size() != references.size()) {
    throw Error(ErrorKind::InvalidArgument, "length_mismatch",
                "candidate and reference corpora differ in length");
  }
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "empty_corpus");

  const auto max_n = static_cast<std::size_t>(config.max_n);
  BleuReport report;
  report.precisions.resize(max_n);
  report.segments = candidates.size();

  for (std::size_t s = 0; s < candidates.size(); ++s) {
    if (references[s].empty()) {
      throw Error(ErrorKind::InvalidArgument, "empty_reference_set",
                  "segment " + std::to_string(s) + " has no references");
    }
    const Tokens cand = detail::apply_case(candidates[s], config.case_mode);
    std::vector<Tokens> refs;
    refs.reserve(references[s].size());
    for (const auto& r : references[s]) refs.push_back(detail::apply_case(r, config.case_mode));

    report.candidate_len += cand.size();
    report.reference_len += effective_reference_length(cand.size(), refs);
    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto [clipped, total] = modified_precision(cand, refs, static_cast<int>(n));
      report.precisions[n - 1].clipped += clipped;
      report.precisions[n - 1].total += total;
    }
  }

  for (auto& p : report.precisions) {
    if (p.clipped > 0) {
      p.value = static_cast<double>(p.clipped) / static_cast<double>(p.total);
    } else if (config.smoothing == Smoothing::AddEpsilon) {
      p.value = config.epsilon / static_cast<double>(std::max<std::size_t>(p.total, 1));
    } else {
      p.value = 0.0;
    }
  }

  if (report.candidate_len == 0) {
    // Limit of exp(1 - r/c) as c -> 0.
    report.brevity_penalty = report.reference_len == 0 ? 1.0 : 0.0;
    report.score = 0.0;
    return report;
  }
  report.brevity_penalty = brevity_penalty(report.candidate_len, report.reference_len);

  const auto weights = config.effective_weights();
  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (weights[n] == 0.0) continue;
    if (report.precisions[n].value <= 0.0) {
      report.score = 0.0;
      return report;
    }
    log_sum += weights[n] * std::log(report.precisions[n].value);
  }
  report.score = report.brevity_penalty * std::exp(log_sum);
  return report;
}

inline BleuReport sentence_bleu(std::span<const std::string> candidate,
                                std::span<const Tokens> references,
                                const BleuConfig& config = BleuConfig::sentence_default()) {
  const std::vector<Tokens> cands = {Tokens(candidate.begin(), candidate.end())};
  const std::vector<std::vector<Tokens>> refs = {
      std::vector<Tokens>(references.begin(), references.end())};
  return corpus_bleu(cands, refs, config);
}

}  // namespace parcorp::bleu
