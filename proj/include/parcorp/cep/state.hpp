#pragma once

// Event-sourced state of the engagement platform. Every mutation arrives as
// an event and is applied by State::apply; replaying the same event stream
// onto an empty state reproduces the same state bit for bit.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "parcorp/cep/policy.hpp"
#include "parcorp/digest.hpp"
#include "parcorp/error.hpp"
#include "parcorp/filter.hpp"
#include "parcorp/types.hpp"

namespace parcorp::cep {

// Author marker for candidates that come from aligned or imported pairs.
inline constexpr std::string_view kMachineAuthor = "@machine";

struct ContributorProfile {
  std::string id;
  std::string handle;
  long long points = 0;
  std::vector<BadgeKind> badges;
  std::size_t translations_submitted = 0;
  std::size_t verifications_submitted = 0;
  std::size_t skips = 0;
  std::string created_at;
  std::uint64_t score_seq = 0;  // event that last changed `points`

  bool operator==(const ContributorProfile&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ContributorProfile, id, handle, points, badges,
                                   translations_submitted, verifications_submitted, skips,
                                   created_at, score_seq)

struct ApiToken {
  std::string token;
  std::string contributor;
  std::string issued_at;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ApiToken, token, contributor, issued_at)

struct TranslationCandidate {
  std::string id;
  std::string source_segment;
  std::string text;
  std::string author;  // contributor id or kMachineAuthor
  std::string created_at;
  std::uint64_t ordinal = 0;  // creation order
  std::optional<std::string> pair_id;
  Status status = Status::Pending;
  std::vector<std::string> verifications;

  bool machine() const { return author == kMachineAuthor; }
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TranslationCandidate, id, source_segment, text, author,
                                   created_at, ordinal, pair_id, status, verifications)

struct Verification {
  std::string id;
  std::string candidate;
  std::string verifier;
  int rating = 0;
  std::optional<std::string> alternative;
  std::string created_at;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Verification, id, candidate, verifier, rating, alternative,
                                   created_at)

enum class BatchKind { Translate, Verify };
NLOHMANN_JSON_SERIALIZE_ENUM(BatchKind, {{BatchKind::Translate, "translate"},
                                         {BatchKind::Verify, "verify"}})

enum class ItemState { Open, Done, Skipped };
NLOHMANN_JSON_SERIALIZE_ENUM(ItemState, {{ItemState::Open, "open"},
                                         {ItemState::Done, "done"},
                                         {ItemState::Skipped, "skipped"}})

// One task in a batch. For Translate items `target` is a segment id and
// `text` its sentence; for Verify items `target` is a candidate id, `text`
// the candidate and `source_text` the sentence it translates.
struct BatchItem {
  std::string id;
  std::string batch;
  std::string target;
  ItemState state = ItemState::Open;
  std::string text;
  std::string source_text;
  Lang lang = Lang::EN;  // language of the source sentence
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BatchItem, id, batch, target, state, text, source_text, lang)

struct Batch {
  std::string id;
  std::string contributor;
  BatchKind kind = BatchKind::Translate;
  std::vector<std::string> items;
  std::string issued_at;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Batch, id, contributor, kind, items, issued_at)

// A bilingual document pair waiting for (or done with) sentence alignment.
struct StagedDocument {
  std::string id;
  Lang src_lang = Lang::EN;
  std::string src_text;
  std::string tgt_text;
  json meta = json::object();
  std::string staged_at;
  bool aligned = false;
  json report = nullptr;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StagedDocument, id, src_lang, src_text, tgt_text, meta,
                                   staged_at, aligned, report)

class State {
 public:
  explicit State(CepConfig config = {}) : config_(config) {}

  const CepConfig& config() const { return config_; }

  // Primary records. Everything below `derived indices` is rebuilt from
  // these on load.
  std::uint64_t last_seq = 0;
  std::uint64_t next_id = 1;
  std::map<std::string, ContributorProfile> contributors;
  std::map<std::string, ApiToken> tokens;
  std::map<std::string, Segment> segments;
  std::vector<std::string> tasks;  // translation pool, oldest first
  std::map<std::string, SegmentPair> pairs;
  std::map<std::string, TranslationCandidate> candidates;
  std::map<std::string, Verification> verifications;
  std::map<std::string, Batch> batches;
  std::map<std::string, BatchItem> items;
  std::map<std::string, std::set<std::string>> issued;  // contributor -> targets
  std::map<std::string, StagedDocument> documents;
  std::map<std::string, std::size_t> crowd_positions;  // per target language

  // derived indices
  std::map<std::string, std::string> handle_index;     // dedup form -> contributor
  std::map<std::string, std::string> pair_keys;        // dedup key -> pair
  std::map<std::string, std::string> candidate_keys;   // segment + form -> candidate
  std::map<std::string, std::size_t> candidate_count;  // segment -> #candidates
  std::set<std::string> task_forms;                    // lang + form of pool sentences

  static std::string handle_form(std::string_view handle) {
    return dedup_form(normalize_text(handle));
  }
  static std::string candidate_key(std::string_view segment, std::string_view text) {
    return std::string(segment) + '\x1f' + dedup_form(text);
  }
  static std::string task_form(Lang lang, std::string_view text) {
    return std::string(to_string(lang)) + '\x1f' + dedup_form(text);
  }

  /// Applies one event and returns what it created. Events must already be
  /// validated; a malformed event is a store error.
  json apply(const json& event) {
    const auto seq = event.at("seq").get<std::uint64_t>();
    if (seq != last_seq + 1) {
      throw Error(ErrorKind::Store, "event_sequence_gap",
                  "expected event " + std::to_string(last_seq + 1) + ", got " +
                      std::to_string(seq));
    }
    const auto& type = event.at("type").get_ref<const std::string&>();
    const auto& ts = event.at("ts").get_ref<const std::string&>();
    const json& data = event.at("data");
    last_seq = seq;

    if (type == "register") return apply_register(data, ts);
    if (type == "add_sources") return apply_add_sources(data);
    if (type == "add_pairs") return apply_add_pairs(data.at("pairs"), ts);
    if (type == "stage_document") return apply_stage_document(data, ts);
    if (type == "align_document") return apply_align_document(data, ts);
    if (type == "issue_batch") return apply_issue_batch(data, ts);
    if (type == "translate") return apply_translate(data, ts);
    if (type == "skip") return apply_skip(data);
    if (type == "verify") return apply_verify(data, ts);
    throw Error(ErrorKind::Store, "unknown_event_type", "unknown event type '" + type + "'");
  }

  json to_json() const {
    json j;
    j["last_seq"] = last_seq;
    j["next_id"] = next_id;
    j["contributors"] = contributors;
    j["tokens"] = tokens;
    j["segments"] = segments;
    j["tasks"] = tasks;
    j["pairs"] = pairs;
    j["candidates"] = candidates;
    j["verifications"] = verifications;
    j["batches"] = batches;
    j["items"] = items;
    j["issued"] = issued;
    j["documents"] = documents;
    j["crowd_positions"] = crowd_positions;
    return j;
  }

  static State from_json(const json& j, CepConfig config = {}) {
    State s(config);
    s.last_seq = j.at("last_seq").get<std::uint64_t>();
    s.next_id = j.at("next_id").get<std::uint64_t>();
    j.at("contributors").get_to(s.contributors);
    j.at("tokens").get_to(s.tokens);
    j.at("segments").get_to(s.segments);
    j.at("tasks").get_to(s.tasks);
    j.at("pairs").get_to(s.pairs);
    j.at("candidates").get_to(s.candidates);
    j.at("verifications").get_to(s.verifications);
    j.at("batches").get_to(s.batches);
    j.at("items").get_to(s.items);
    j.at("issued").get_to(s.issued);
    j.at("documents").get_to(s.documents);
    j.at("crowd_positions").get_to(s.crowd_positions);
    s.reindex();
    return s;
  }

  std::string digest() const { return sha256_hex(to_json().dump()); }

  std::vector<int> ratings_of(const TranslationCandidate& c) const {
    std::vector<int> out;
    out.reserve(c.verifications.size());
    for (const auto& v : c.verifications) out.push_back(verifications.at(v).rating);
    return out;
  }

 private:
  std::string new_id(std::string_view prefix) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*s-%08llu", static_cast<int>(prefix.size()), prefix.data(),
                  static_cast<unsigned long long>(next_id++));
    return buf;
  }

  void reindex() {
    handle_index.clear();
    pair_keys.clear();
    candidate_keys.clear();
    candidate_count.clear();
    task_forms.clear();
    for (const auto& [id, p] : contributors) handle_index[handle_form(p.handle)] = id;
    for (const auto& [id, p] : pairs) pair_keys[dedup_key(p)] = id;
    for (const auto& [id, c] : candidates) {
      candidate_keys[candidate_key(c.source_segment, c.text)] = id;
      ++candidate_count[c.source_segment];
    }
    for (const auto& t : tasks) {
      const auto& seg = segments.at(t);
      task_forms.insert(task_form(seg.lang, seg.normalized));
    }
  }

  void credit(ContributorProfile& p, long long points) {
    p.points += points;
    p.score_seq = last_seq;
    // Badges only grow; points never decrease.
    for (auto b : badges_for(p.points, config_)) {
      if (std::find(p.badges.begin(), p.badges.end(), b) == p.badges.end()) p.badges.push_back(b);
    }
  }

  json apply_register(const json& data, const std::string& ts) {
    ContributorProfile p;
    p.id = new_id("ctb");
    p.handle = data.at("handle").get<std::string>();
    p.created_at = ts;
    p.score_seq = last_seq;
    const auto token = data.at("token").get<std::string>();
    handle_index[handle_form(p.handle)] = p.id;
    tokens[token] = ApiToken{token, p.id, ts};
    contributors[p.id] = p;
    return {{"id", p.id}};
  }

  json apply_add_sources(const json& data) {
    json ids = json::array();
    for (const auto& s : data.at("segments")) {
      Segment seg = s.get<Segment>();
      seg.id = new_id("seg");
      task_forms.insert(task_form(seg.lang, seg.normalized));
      tasks.push_back(seg.id);
      ids.push_back(seg.id);
      segments[seg.id] = std::move(seg);
    }
    return {{"ids", ids}};
  }

  std::string store_pair(SegmentPair pair, const std::string& ts) {
    if (pair.id.empty()) pair.id = new_id("pair");
    if (pair.src.id.empty()) pair.src.id = new_id("seg");
    if (pair.tgt.id.empty()) pair.tgt.id = new_id("seg");
    if (pair.created_at.empty()) pair.created_at = ts;
    segments[pair.src.id] = pair.src;
    segments[pair.tgt.id] = pair.tgt;
    pair_keys[dedup_key(pair)] = pair.id;

    if (pair.origin != Origin::Crowdsourced && pair.status == Status::Pending) {
      TranslationCandidate c;
      c.id = new_id("cand");
      c.source_segment = pair.src.id;
      c.text = pair.tgt.normalized;
      c.author = std::string(kMachineAuthor);
      c.created_at = ts;
      c.ordinal = next_id;
      c.pair_id = pair.id;
      candidate_keys[candidate_key(c.source_segment, c.text)] = c.id;
      ++candidate_count[c.source_segment];
      candidates[c.id] = std::move(c);
    }
    const std::string id = pair.id;
    pairs[id] = std::move(pair);
    return id;
  }

  json apply_add_pairs(const json& list, const std::string& ts) {
    json ids = json::array();
    for (const auto& p : list) ids.push_back(store_pair(p.get<SegmentPair>(), ts));
    return {{"ids", ids}};
  }

  json apply_stage_document(const json& data, const std::string& ts) {
    StagedDocument doc;
    doc.id = new_id("doc");
    doc.src_lang = data.at("src_lang").get<Lang>();
    doc.src_text = data.at("src_text").get<std::string>();
    doc.tgt_text = data.at("tgt_text").get<std::string>();
    doc.meta = data.value("meta", json::object());
    doc.staged_at = ts;
    const std::string id = doc.id;
    documents[id] = std::move(doc);
    return {{"id", id}};
  }

  json apply_align_document(const json& data, const std::string& ts) {
    auto& doc = documents.at(data.at("doc_id").get<std::string>());
    doc.aligned = true;
    doc.report = data.at("report");
    return apply_add_pairs(data.at("pairs"), ts);
  }

  json apply_issue_batch(const json& data, const std::string& ts) {
    Batch batch;
    batch.id = new_id("bat");
    batch.contributor = data.at("contributor").get<std::string>();
    batch.kind = data.at("kind").get<BatchKind>();
    batch.issued_at = ts;
    auto& seen = issued[batch.contributor];
    for (const auto& t : data.at("targets")) {
      BatchItem item;
      item.id = new_id("itm");
      item.batch = batch.id;
      item.target = t.get<std::string>();
      if (batch.kind == BatchKind::Translate) {
        const auto& seg = segments.at(item.target);
        item.text = seg.normalized;
        item.lang = seg.lang;
      } else {
        const auto& cand = candidates.at(item.target);
        const auto& seg = segments.at(cand.source_segment);
        item.text = cand.text;
        item.source_text = seg.normalized;
        item.lang = seg.lang;
      }
      seen.insert(item.target);
      batch.items.push_back(item.id);
      items[item.id] = std::move(item);
    }
    const std::string id = batch.id;
    batches[id] = std::move(batch);
    return {{"id", id}};
  }

  // Creates a candidate unless the same text already exists for the
  // segment; returns the candidate id either way.
  std::string add_candidate(const std::string& segment, const std::string& text,
                            const std::string& author, const std::string& ts) {
    const auto key = candidate_key(segment, text);
    if (auto it = candidate_keys.find(key); it != candidate_keys.end()) return it->second;
    TranslationCandidate c;
    c.id = new_id("cand");
    c.source_segment = segment;
    c.text = text;
    c.author = author;
    c.created_at = ts;
    c.ordinal = next_id;
    candidate_keys[key] = c.id;
    ++candidate_count[segment];
    const std::string id = c.id;
    candidates[id] = std::move(c);
    return id;
  }

  json apply_translate(const json& data, const std::string& ts) {
    auto& item = items.at(data.at("item").get<std::string>());
    const auto& batch = batches.at(item.batch);
    auto& profile = contributors.at(batch.contributor);
    json ids = json::array();
    for (const auto& t : data.at("texts")) {
      ids.push_back(add_candidate(item.target, t.get<std::string>(), profile.id, ts));
    }
    item.state = ItemState::Done;
    ++profile.translations_submitted;
    credit(profile, config_.translate_points);
    return {{"ids", ids}};
  }

  json apply_skip(const json& data) {
    auto& item = items.at(data.at("item").get<std::string>());
    item.state = ItemState::Skipped;
    ++contributors.at(batches.at(item.batch).contributor).skips;
    return {{"id", item.id}};
  }

  json apply_verify(const json& data, const std::string& ts) {
    auto& item = items.at(data.at("item").get<std::string>());
    const auto& batch = batches.at(item.batch);
    auto& profile = contributors.at(batch.contributor);

    Verification v;
    v.id = new_id("ver");
    v.candidate = item.target;
    v.verifier = profile.id;
    v.rating = data.at("rating").get<int>();
    v.alternative = data.at("alternative").get<std::optional<std::string>>();
    v.created_at = ts;

    json result = {{"id", v.id}, {"alternative_candidate", nullptr}};
    candidates.at(v.candidate).verifications.push_back(v.id);
    item.state = ItemState::Done;
    ++profile.verifications_submitted;
    credit(profile, config_.verify_points);

    if (v.alternative) {
      const auto segment = candidates.at(v.candidate).source_segment;
      result["alternative_candidate"] = add_candidate(segment, *v.alternative, profile.id, ts);
      ++profile.translations_submitted;
      credit(profile, config_.translate_points);
    }
    const std::string cand_id = v.candidate;
    verifications[v.id] = std::move(v);

    auto& cand = candidates.at(cand_id);
    if (!is_terminal(cand.status)) {
      const Status decided = decide_status(ratings_of(cand), config_);
      if (is_terminal(decided)) settle(cand, decided, ts);
    }
    result["status"] = cand.status;
    return result;
  }

  // A candidate reached a terminal status; mirror it onto its pair,
  // creating a crowdsourced pair when it has none yet.
  void settle(TranslationCandidate& cand, Status status, const std::string& ts) {
    cand.status = status;
    if (!cand.pair_id) {
      const Segment& src = segments.at(cand.source_segment);
      SegmentPair pair;
      pair.src = src;
      const Lang tgt_lang = other(src.lang);
      const std::string doc = "crowd:" + std::string(to_string(tgt_lang));
      pair.tgt = Segment{"", tgt_lang, cand.text, cand.text, doc, 0};
      const auto key = dedup_key(pair);
      if (auto it = pair_keys.find(key); it != pair_keys.end()) {
        cand.pair_id = it->second;
      } else {
        pair.tgt.id = new_id("seg");
        pair.tgt.position = crowd_positions[doc]++;
        pair.id = new_id("pair");
        pair.origin = Origin::Crowdsourced;
        pair.status = Status::Pending;
        pair.created_at = ts;
        cand.pair_id = store_pair(std::move(pair), ts);
      }
    }
    auto& pair = pairs.at(*cand.pair_id);
    if (!is_terminal(pair.status)) pair.status = status;
  }

  CepConfig config_;
};

}  // namespace parcorp::cep
