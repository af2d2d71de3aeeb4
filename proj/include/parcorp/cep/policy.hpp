#pragma once

// Verification quorum, points economy and badge tiers of the engagement
// platform. All thresholds are configurable.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "parcorp/error.hpp"
#include "parcorp/types.hpp"

namespace parcorp::cep {

enum class BadgeKind { Bronze, Silver, Gold };
NLOHMANN_JSON_SERIALIZE_ENUM(BadgeKind, {{BadgeKind::Bronze, "bronze"},
                                         {BadgeKind::Silver, "silver"},
                                         {BadgeKind::Gold, "gold"}})

inline constexpr std::array<BadgeKind, 3> kBadgeTiers = {BadgeKind::Bronze, BadgeKind::Silver,
                                                         BadgeKind::Gold};

struct CepConfig {
  std::size_t batch_size = 5;
  std::size_t max_texts = 5;  // translations per item
  std::size_t quorum = 3;
  double verify_mean = 4.0;
  double reject_mean = 2.5;
  long long translate_points = 2;
  long long verify_points = 1;
  std::array<long long, 3> badge_thresholds = {10, 100, 1000};

  void validate() const {
    if (batch_size == 0 || max_texts == 0 || quorum == 0) {
      throw Error(ErrorKind::InvalidArgument, "invalid_cep_config");
    }
    if (!(reject_mean <= verify_mean)) {
      throw Error(ErrorKind::InvalidArgument, "invalid_cep_config",
                  "reject threshold above verify threshold");
    }
    if (translate_points < 0 || verify_points < 0) {
      throw Error(ErrorKind::InvalidArgument, "invalid_cep_config");
    }
    for (std::size_t i = 1; i < badge_thresholds.size(); ++i) {
      if (badge_thresholds[i] <= badge_thresholds[i - 1]) {
        throw Error(ErrorKind::InvalidArgument, "invalid_cep_config",
                    "badge thresholds must increase");
      }
    }
  }

  bool operator==(const CepConfig&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CepConfig, batch_size, max_texts, quorum,
                                                verify_mean, reject_mean, translate_points,
                                                verify_points, badge_thresholds)

/// Status implied by a candidate's ratings. Terminal freezing is the
/// caller's job.
inline Status decide_status(std::span<const int> ratings, const CepConfig& config) {
  if (ratings.size() < config.quorum) return Status::Pending;
  long long sum = 0;
  for (int r : ratings) sum += r;
  const double n = static_cast<double>(ratings.size());
  if (static_cast<double>(sum) >= config.verify_mean * n) return Status::Verified;
  if (static_cast<double>(sum) < config.reject_mean * n) return Status::Rejected;
  return Status::Pending;
}

inline std::vector<BadgeKind> badges_for(long long points, const CepConfig& config) {
  std::vector<BadgeKind> out;
  for (std::size_t i = 0; i < kBadgeTiers.size(); ++i) {
    if (points >= config.badge_thresholds[i]) out.push_back(kBadgeTiers[i]);
  }
  return out;
}

}  // namespace parcorp::cep
