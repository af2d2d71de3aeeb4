#pragma once

// Train/dev/test export of the pair store as line-aligned text files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "parcorp/digest.hpp"
#include "parcorp/error.hpp"
#include "parcorp/text.hpp"
#include "parcorp/types.hpp"

namespace parcorp {

enum class ExportFilter { Verified, VerifiedPending, All };
NLOHMANN_JSON_SERIALIZE_ENUM(ExportFilter, {{ExportFilter::Verified, "verified"},
                                            {ExportFilter::VerifiedPending, "verified+pending"},
                                            {ExportFilter::All, "all"}})

inline ExportFilter parse_export_filter(std::string_view s) {
  if (s == "verified") return ExportFilter::Verified;
  if (s == "verified+pending" || s == "verified,pending") return ExportFilter::VerifiedPending;
  if (s == "all") return ExportFilter::All;
  throw Error(ErrorKind::InvalidArgument, "unknown_status_filter",
              "unknown status filter '" + std::string(s) + "'");
}

inline bool passes(ExportFilter filter, Status status) {
  switch (filter) {
    case ExportFilter::Verified: return status == Status::Verified;
    case ExportFilter::VerifiedPending: return status != Status::Rejected;
    case ExportFilter::All: return true;
  }
  return false;
}

struct ExportOptions {
  ExportFilter filter = ExportFilter::Verified;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios = {0.8, 0.1, 0.1};
  Lang src_lang = Lang::EN;

  void validate() const {
    double sum = 0.0;
    for (double r : ratios) {
      if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid_ratios", "ratios must be positive");
      sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "invalid_ratios", "ratios must sum to 1");
    }
  }
};

inline constexpr std::array<const char*, 3> kSplitNames = {"train", "dev", "test"};

// File name -> content, plus the manifest.
struct ExportBundle {
  std::map<std::string, std::string> files;
  json manifest;
};

/// Sizes of the train/dev/test splits; test takes the remainder.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  const auto train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(n * ratios[0])));
  const auto dev =
      std::min<std::size_t>(n - train, static_cast<std::size_t>(std::llround(n * ratios[1])));
  return {train, dev, n - train - dev};
}

/// Selects pairs by status, shuffles their ids with the seed and writes one
/// canonical tokenized line per sentence. Input order does not matter.
inline ExportBundle export_corpus(std::vector<SegmentPair> pairs, const ExportOptions& options) {
  options.validate();
  std::erase_if(pairs, [&](const SegmentPair& p) { return !passes(options.filter, p.status); });
  std::sort(pairs.begin(), pairs.end(),
            [](const SegmentPair& a, const SegmentPair& b) { return a.id < b.id; });

  std::mt19937_64 rng(options.seed);
  for (std::size_t i = pairs.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(pairs[i - 1], pairs[j]);
  }

  const Lang src = options.src_lang;
  const Lang tgt = other(src);
  const auto sizes = split_sizes(pairs.size(), options.ratios);

  ExportBundle bundle;
  json counts = json::object();
  Sha256 digest;
  std::size_t offset = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    std::string src_text;
    std::string tgt_text;
    for (std::size_t k = offset; k < offset + sizes[s]; ++k) {
      src_text += canonical_line(pairs[k].side(src).normalized, src) + "\n";
      tgt_text += canonical_line(pairs[k].side(tgt).normalized, tgt) + "\n";
    }
    offset += sizes[s];
    const std::string base = kSplitNames[s];
    const std::string src_name = base + "." + std::string(to_string(src));
    const std::string tgt_name = base + "." + std::string(to_string(tgt));
    for (const auto& [name, text] : {std::pair{src_name, &src_text}, std::pair{tgt_name, &tgt_text}}) {
      digest.update(name).update(std::string_view("\0", 1)).update(*text);
      bundle.files[name] = *text;
    }
    counts[base] = sizes[s];
  }

  bundle.manifest = {
      {"counts", counts},
      {"total", pairs.size()},
      {"seed", options.seed},
      {"filter", options.filter},
      {"ratios", options.ratios},
      {"direction", std::string(to_string(src)) + "-" + std::string(to_string(tgt))},
      {"files", [&] {
         json names = json::array();
         for (const auto& [name, _] : bundle.files) names.push_back(name);
         return names;
       }()},
      {"digest", digest.hex()},
  };
  return bundle;
}

inline void write_bundle(const ExportBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Data, "unwritable_output", "cannot create " + dir.string());
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorKind::Data, "unwritable_output", "cannot write " + (dir / name).string());
  };
  for (const auto& [name, content] : bundle.files) write(name, content);
  write("manifest.json", bundle.manifest.dump(2) + "\n");
}

}  // namespace parcorp
