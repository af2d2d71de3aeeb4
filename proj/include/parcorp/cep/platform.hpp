#pragma once

// The engagement platform: validates operations, appends them to the event
// log and applies them to the in-memory state. Writers are serialized by a
// single lock so the log is one ordered stream; readers share the lock.

#include <openssl/rand.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "parcorp/align.hpp"
#include "parcorp/cep/policy.hpp"
#include "parcorp/cep/state.hpp"
#include "parcorp/error.hpp"
#include "parcorp/filter.hpp"
#include "parcorp/store/event_log.hpp"
#include "parcorp/text.hpp"
#include "parcorp/types.hpp"

namespace parcorp::cep {

struct PlatformConfig {
  FilterRule filter;
  aligner::AlignmentParams alignment;
  CepConfig cep;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t added = 0;
  std::size_t duplicates = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count
  std::vector<std::string> ids;

  std::size_t dropped_total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
  }
};

inline void to_json(json& j, const IngestReport& r) {
  j = json{{"lines", r.lines},
           {"added", r.added},
           {"duplicates", r.duplicates},
           {"dropped", r.dropped},
           {"ids", r.ids}};
}

struct Registration {
  ContributorProfile profile;
  std::string token;
};

struct LeaderboardEntry {
  std::size_t rank = 0;
  std::string id;
  std::string handle;
  long long points = 0;
  std::vector<BadgeKind> badges;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LeaderboardEntry, rank, id, handle, points, badges)

struct VerificationOutcome {
  Verification verification;
  Status status = Status::Pending;
  std::optional<TranslationCandidate> alternative;
};

inline std::string random_token() {
  unsigned char bytes[24];
  if (RAND_bytes(bytes, sizeof bytes) != 1) {
    throw Error(ErrorKind::Store, "rng_failure", "cannot generate token");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

class Platform {
 public:
  /// In-memory when `store_dir` is empty; otherwise the store is loaded
  /// (snapshot plus replay) and every write is appended durably.
  explicit Platform(PlatformConfig config = {}, std::optional<std::filesystem::path> store_dir = {},
                    Clock clock = utc_now)
      : config_(config), clock_(std::move(clock)), state_(config.cep) {
    config_.filter.validate();
    config_.alignment.validate();
    config_.cep.validate();
    if (store_dir) {
      log_ = std::make_unique<store::EventLog>(*store_dir);
      recovery_ = log_->load();
      if (recovery_.snapshot) state_ = State::from_json(*recovery_.snapshot, config_.cep);
      for (const auto& e : recovery_.events) state_.apply(e);
      recovery_.snapshot.reset();
      recovery_.events.clear();
    }
  }

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  const PlatformConfig& config() const { return config_; }
  bool durable() const { return log_ != nullptr; }
  const store::LoadResult& recovery() const { return recovery_; }

  /// Runs `fn(const State&)` under the shared lock.
  template <typename F>
  auto read(F&& fn) const {
    std::shared_lock lock(mutex_);
    return fn(std::as_const(state_));
  }

  std::string digest() const {
    std::shared_lock lock(mutex_);
    return state_.digest();
  }

  std::uint64_t last_seq() const {
    std::shared_lock lock(mutex_);
    return state_.last_seq;
  }

  void snapshot() {
    std::unique_lock lock(mutex_);
    if (log_) log_->write_snapshot(state_.last_seq, state_.to_json());
  }

  // --- contributors ---------------------------------------------------

  Registration register_contributor(std::string_view handle) {
    const std::string normalized = normalize_text(handle);
    if (normalized.empty()) throw Error(ErrorKind::Precondition, "empty_handle", "handle is empty");
    std::unique_lock lock(mutex_);
    if (state_.handle_index.count(State::handle_form(normalized))) {
      throw Error(ErrorKind::Conflict, "duplicate_handle",
                  "handle '" + normalized + "' is already taken");
    }
    std::string token;
    do {
      token = random_token();
    } while (state_.tokens.count(token));
    const json r = commit("register", {{"handle", normalized}, {"token", token}});
    return {state_.contributors.at(r.at("id").get<std::string>()), token};
  }

  std::string authenticate(std::string_view token) const {
    std::shared_lock lock(mutex_);
    const auto it = state_.tokens.find(std::string(token));
    if (it == state_.tokens.end()) {
      throw Error(ErrorKind::Unauthorized, "invalid_token", "missing or invalid token");
    }
    return it->second.contributor;
  }

  ContributorProfile profile(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return contributor(id);
  }

  /// Badges are kept current on every point change; this returns the set.
  std::vector<BadgeKind> award_badges(const std::string& id) const { return profile(id).badges; }

  std::vector<LeaderboardEntry> leaderboard(std::size_t limit) const {
    std::vector<const ContributorProfile*> ranked;
    std::shared_lock lock(mutex_);
    for (const auto& [_, p] : state_.contributors) ranked.push_back(&p);
    std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) {
      return std::tie(b->points, a->score_seq, a->handle) <
             std::tie(a->points, b->score_seq, b->handle);
    });
    std::vector<LeaderboardEntry> out;
    for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) {
      const auto& p = *ranked[i];
      out.push_back({i + 1, p.id, p.handle, p.points, p.badges});
    }
    return out;
  }

  // --- corpus ----------------------------------------------------------

  /// Adds monolingual sentences to the translation pool. Empty lines and
  /// sentences already in the pool are skipped.
  IngestReport add_sources(Lang lang, const std::vector<std::string>& texts,
                           const std::string& source_doc) {
    IngestReport report;
    report.lines = texts.size();
    std::unique_lock lock(mutex_);
    std::set<std::string> seen;
    json segments = json::array();
    for (std::size_t i = 0; i < texts.size(); ++i) {
      Segment seg = make_segment("", lang, texts[i], source_doc, i);
      if (seg.normalized.empty()) {
        ++report.dropped["empty"];
        continue;
      }
      const auto form = State::task_form(lang, seg.normalized);
      if (state_.task_forms.count(form) || !seen.insert(form).second) {
        ++report.duplicates;
        continue;
      }
      segments.push_back(seg);
    }
    report.added = segments.size();
    if (!segments.empty()) {
      const json r = commit("add_sources", {{"segments", segments}});
      report.ids = r.at("ids").get<std::vector<std::string>>();
    }
    return report;
  }

  /// Stores line-aligned pairs as Pending after filtering and dedup.
  IngestReport ingest_pairs(const std::vector<std::pair<std::string, std::string>>& rows,
                            Lang src_lang, const std::string& source_doc,
                            Origin origin = Origin::Imported) {
    const Lang tgt_lang = other(src_lang);
    std::vector<SegmentPair> candidates;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      SegmentPair p;
      p.src = make_segment("", src_lang, rows[i].first,
                           source_doc + ":" + std::string(to_string(src_lang)), i);
      p.tgt = make_segment("", tgt_lang, rows[i].second,
                           source_doc + ":" + std::string(to_string(tgt_lang)), i);
      p.origin = origin;
      candidates.push_back(std::move(p));
    }
    std::unique_lock lock(mutex_);
    IngestReport report;
    report.lines = rows.size();
    json accepted = admit(std::move(candidates), report);
    if (!accepted.empty()) {
      const json r = commit("add_pairs", {{"pairs", accepted}});
      report.ids = r.at("ids").get<std::vector<std::string>>();
    }
    return report;
  }

  std::string stage_document(Lang src_lang, const std::string& src_text,
                             const std::string& tgt_text, const json& meta = json::object()) {
    if (normalize_text(src_text).empty() || normalize_text(tgt_text).empty()) {
      throw Error(ErrorKind::Precondition, "empty_document", "both documents must be non-empty");
    }
    std::unique_lock lock(mutex_);
    const json r = commit("stage_document", {{"src_lang", src_lang},
                                             {"src_text", src_text},
                                             {"tgt_text", tgt_text},
                                             {"meta", meta.is_null() ? json::object() : meta}});
    return r.at("id").get<std::string>();
  }

  std::vector<std::string> unaligned_documents() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, d] : state_.documents) {
      if (!d.aligned) out.push_back(id);
    }
    return out;
  }

  /// Sentence-splits and aligns a staged document pair and stores the
  /// resulting pairs.
  json align_document(const std::string& doc_id) {
    std::unique_lock lock(mutex_);
    const auto it = state_.documents.find(doc_id);
    if (it == state_.documents.end()) {
      throw Error(ErrorKind::NotFound, "unknown_document", "no staged document '" + doc_id + "'");
    }
    const StagedDocument& doc = it->second;
    if (doc.aligned) {
      throw Error(ErrorKind::Precondition, "already_aligned", "document '" + doc_id + "' is aligned");
    }
    const Lang tgt_lang = other(doc.src_lang);
    const auto src = sentence_split(normalize_text(doc.src_text, doc.src_lang), doc.src_lang);
    const auto tgt = sentence_split(normalize_text(doc.tgt_text, tgt_lang), tgt_lang);
    const auto links = aligner::align(src, tgt, config_.alignment);
    auto emitted = aligner::emit_pairs(links, src, tgt, config_.filter,
                                       {doc_id, doc.src_lang, clock_()});

    IngestReport report;
    report.lines = emitted.pairs.size();
    json accepted = admit(std::move(emitted.pairs), report);
    json summary = {{"doc_id", doc_id},
                    {"src_sentences", src.size()},
                    {"tgt_sentences", tgt.size()},
                    {"links", emitted.report.links},
                    {"kinds", json::object()},
                    {"cost", aligner::total_cost(links)},
                    {"pairs", emitted.report.pairs},
                    {"added", report.added},
                    {"duplicates", report.duplicates},
                    {"dropped", emitted.report.dropped}};
    for (const auto& l : links) {
      auto& slot = summary["kinds"][std::string(aligner::to_string(l.kind))];
      slot = slot.is_null() ? 1 : slot.get<int>() + 1;
    }
    const json r =
        commit("align_document", {{"doc_id", doc_id}, {"pairs", accepted}, {"report", summary}});
    summary["ids"] = r.at("ids");
    return summary;
  }

  std::vector<SegmentPair> pairs() const {
    std::shared_lock lock(mutex_);
    std::vector<SegmentPair> out;
    out.reserve(state_.pairs.size());
    for (const auto& [_, p] : state_.pairs) out.push_back(p);
    return out;
  }

  /// Exact-match lookup over Verified pairs: `text` is compared with the
  /// pair side in `src_lang` and the other side is returned.
  std::optional<std::string> translation_memory(std::string_view text, Lang src_lang) const {
    const std::string form = dedup_form(normalize_text(text));
    if (form.empty()) return std::nullopt;
    std::shared_lock lock(mutex_);
    for (const auto& [_, p] : state_.pairs) {
      if (p.status != Status::Verified) continue;
      if (dedup_form(p.side(src_lang).normalized) == form) {
        return p.side(other(src_lang)).normalized;
      }
    }
    return std::nullopt;
  }

  json stats() const {
    std::shared_lock lock(mutex_);
    json by_status = {{"pending", 0}, {"verified", 0}, {"rejected", 0}};
    json by_origin = {{"document_aligned", 0}, {"crowdsourced", 0}, {"imported", 0}};
    std::map<std::string, std::size_t> tokens = {{"en", 0}, {"om", 0}};
    for (const auto& [_, p] : state_.pairs) {
      auto& s = by_status[json(p.status).get<std::string>()];
      s = s.get<std::size_t>() + 1;
      auto& o = by_origin[json(p.origin).get<std::string>()];
      o = o.get<std::size_t>() + 1;
      for (const Segment* seg : {&p.src, &p.tgt}) {
        tokens[std::string(to_string(seg->lang))] += tokenize(seg->normalized).size();
      }
    }
    long long points = 0;
    std::size_t translations = 0;
    std::size_t verifications = 0;
    for (const auto& [_, c] : state_.contributors) {
      points += c.points;
      translations += c.translations_submitted;
      verifications += c.verifications_submitted;
    }
    std::size_t aligned = 0;
    for (const auto& [_, d] : state_.documents) aligned += d.aligned ? 1 : 0;
    return {{"pairs", {{"total", state_.pairs.size()}, {"by_status", by_status}, {"by_origin", by_origin}}},
            {"tokens", tokens},
            {"contributors", {{"total", state_.contributors.size()},
                              {"points", points},
                              {"translations", translations},
                              {"verifications", verifications}}},
            {"candidates", state_.candidates.size()},
            {"source_segments", state_.tasks.size()},
            {"documents", {{"staged", state_.documents.size()}, {"aligned", aligned}}},
            {"events", state_.last_seq}};
  }

  // --- tasks -----------------------------------------------------------

  /// Issues up to batch_size items the contributor has never been issued.
  /// An empty pool yields a batch with no id and no items.
  json request_batch(const std::string& contributor_id, BatchKind kind) {
    std::unique_lock lock(mutex_);
    contributor(contributor_id);
    const auto targets = eligible(contributor_id, kind, config_.cep.batch_size);
    if (targets.empty()) {
      return {{"id", nullptr}, {"contributor", contributor_id}, {"kind", kind},
              {"issued_at", nullptr}, {"items", json::array()}};
    }
    const json r = commit("issue_batch",
                          {{"contributor", contributor_id}, {"kind", kind}, {"targets", targets}});
    return batch_view(r.at("id").get<std::string>());
  }

  json batch(const std::string& batch_id) const {
    std::shared_lock lock(mutex_);
    if (!state_.batches.count(batch_id)) {
      throw Error(ErrorKind::NotFound, "unknown_batch", "no batch '" + batch_id + "'");
    }
    return batch_view(batch_id);
  }

  /// Number of items `request_batch` could issue right now, uncapped.
  std::size_t eligible_count(const std::string& contributor_id, BatchKind kind) const {
    std::shared_lock lock(mutex_);
    contributor(contributor_id);
    return eligible(contributor_id, kind, std::numeric_limits<std::size_t>::max()).size();
  }

  std::vector<TranslationCandidate> submit_translation(const std::string& contributor_id,
                                                       const std::string& item_id,
                                                       const std::vector<std::string>& texts) {
    std::vector<std::string> kept;
    std::set<std::string> forms;
    for (const auto& t : texts) {
      std::string n = normalize_text(t);
      if (n.empty()) continue;
      if (forms.insert(dedup_form(n)).second) kept.push_back(std::move(n));
    }
    if (kept.empty()) {
      throw Error(ErrorKind::Precondition, "empty_translation", "no non-empty translation given");
    }
    if (kept.size() > config_.cep.max_texts) {
      throw Error(ErrorKind::Precondition, "too_many_texts",
                  "at most " + std::to_string(config_.cep.max_texts) + " translations per item");
    }
    std::unique_lock lock(mutex_);
    open_item(contributor_id, item_id, BatchKind::Translate);
    const json r = commit("translate", {{"item", item_id}, {"texts", kept}});
    std::vector<TranslationCandidate> out;
    for (const auto& id : r.at("ids")) out.push_back(state_.candidates.at(id.get<std::string>()));
    return out;
  }

  void skip_item(const std::string& contributor_id, const std::string& item_id) {
    std::unique_lock lock(mutex_);
    open_item(contributor_id, item_id, std::nullopt);
    commit("skip", {{"item", item_id}});
  }

  VerificationOutcome submit_verification(const std::string& contributor_id,
                                          const std::string& item_id, int rating,
                                          const std::optional<std::string>& alternative) {
    if (rating < 1 || rating > 5) {
      throw Error(ErrorKind::Precondition, "rating_out_of_range", "rating must be in 1..5");
    }
    std::optional<std::string> alt;
    if (alternative) {
      std::string n = normalize_text(*alternative);
      if (!n.empty()) alt = std::move(n);
    }
    std::unique_lock lock(mutex_);
    const BatchItem& item = open_item(contributor_id, item_id, BatchKind::Verify);
    const auto& cand = state_.candidates.at(item.target);
    if (cand.author == contributor_id) {
      throw Error(ErrorKind::Precondition, "self_verification", "cannot verify own translation");
    }
    for (const auto& v : cand.verifications) {
      if (state_.verifications.at(v).verifier == contributor_id) {
        throw Error(ErrorKind::Precondition, "already_verified", "candidate already verified");
      }
    }
    if (alt && dedup_form(*alt) == dedup_form(cand.text)) {
      throw Error(ErrorKind::Precondition, "invalid_alternative",
                  "alternative must differ from the candidate");
    }
    const json r = commit("verify", {{"item", item_id}, {"rating", rating}, {"alternative", alt}});
    VerificationOutcome out;
    out.verification = state_.verifications.at(r.at("id").get<std::string>());
    out.status = r.at("status").get<Status>();
    if (!r.at("alternative_candidate").is_null()) {
      out.alternative = state_.candidates.at(r.at("alternative_candidate").get<std::string>());
    }
    return out;
  }

  Status aggregate_status(const std::string& candidate_id) const {
    std::shared_lock lock(mutex_);
    const auto it = state_.candidates.find(candidate_id);
    if (it == state_.candidates.end()) {
      throw Error(ErrorKind::NotFound, "unknown_candidate", "no candidate '" + candidate_id + "'");
    }
    return it->second.status;
  }

 private:
  json commit(const std::string& type, json data) {
    json event = {{"seq", state_.last_seq + 1}, {"type", type}, {"ts", clock_()}, {"data", std::move(data)}};
    if (log_) log_->append(event);
    return state_.apply(event);
  }

  const ContributorProfile& contributor(const std::string& id) const {
    const auto it = state_.contributors.find(id);
    if (it == state_.contributors.end()) {
      throw Error(ErrorKind::NotFound, "unknown_contributor", "no contributor '" + id + "'");
    }
    return it->second;
  }

  const BatchItem& open_item(const std::string& contributor_id, const std::string& item_id,
                             std::optional<BatchKind> kind) const {
    contributor(contributor_id);
    const auto it = state_.items.find(item_id);
    if (it == state_.items.end()) {
      throw Error(ErrorKind::NotFound, "unknown_item", "no item '" + item_id + "'");
    }
    const Batch& b = state_.batches.at(it->second.batch);
    if (b.contributor != contributor_id) {
      throw Error(ErrorKind::Precondition, "item_not_owned", "item belongs to another contributor");
    }
    if (kind && b.kind != *kind) {
      throw Error(ErrorKind::Precondition, "wrong_batch_kind", "item is in a different kind of batch");
    }
    if (it->second.state != ItemState::Open) {
      throw Error(ErrorKind::Precondition, "item_not_open", "item is already done or skipped");
    }
    return it->second;
  }

  std::vector<std::string> eligible(const std::string& contributor_id, BatchKind kind,
                                    std::size_t limit) const {
    static const std::set<std::string> kNone;
    const auto issued_it = state_.issued.find(contributor_id);
    const auto& issued = issued_it == state_.issued.end() ? kNone : issued_it->second;

    // (load, age, id): fewest existing contributions first, then oldest.
    std::vector<std::tuple<std::size_t, std::uint64_t, std::string>> pool;
    if (kind == BatchKind::Translate) {
      for (std::size_t i = 0; i < state_.tasks.size(); ++i) {
        const auto& seg = state_.tasks[i];
        if (issued.count(seg)) continue;
        const auto c = state_.candidate_count.find(seg);
        pool.emplace_back(c == state_.candidate_count.end() ? 0 : c->second, i, seg);
      }
    } else {
      for (const auto& [id, c] : state_.candidates) {
        if (c.status != Status::Pending || c.author == contributor_id || issued.count(id)) continue;
        pool.emplace_back(c.verifications.size(), c.ordinal, id);
      }
    }
    const std::size_t n = std::min(limit, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n), pool.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::get<2>(pool[i]));
    return out;
  }

  json batch_view(const std::string& batch_id) const {
    const Batch& b = state_.batches.at(batch_id);
    json items = json::array();
    for (const auto& id : b.items) items.push_back(state_.items.at(id));
    return {{"id", b.id}, {"contributor", b.contributor}, {"kind", b.kind},
            {"issued_at", b.issued_at}, {"items", items}};
  }

  // Filters and dedups pairs against the store and each other; returns the
  // survivors as JSON ready for an add_pairs event.
  json admit(std::vector<SegmentPair> candidates, IngestReport& report) const {
    json accepted = json::array();
    std::set<std::string> seen;
    for (auto& p : candidates) {
      const auto decision = filter_pair(p, config_.filter);
      if (!decision.keep()) {
        ++report.dropped[std::string(to_string(*decision.drop))];
        continue;
      }
      const auto key = dedup_key(p);
      if (state_.pair_keys.count(key) || !seen.insert(key).second) {
        ++report.duplicates;
        continue;
      }
      accepted.push_back(std::move(p));
    }
    report.added = accepted.size();
    return accepted;
  }

  PlatformConfig config_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  State state_;
  std::unique_ptr<store::EventLog> log_;
  store::LoadResult recovery_;
};

}  // namespace parcorp::cep
