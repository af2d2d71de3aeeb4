#pragma once

// HTTP+JSON front end over the engagement platform.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>

#include "parcorp/cep/platform.hpp"
#include "parcorp/config.hpp"
#include "parcorp/error.hpp"
#include "parcorp/export.hpp"
#include "parcorp/types.hpp"

namespace parcorp::service {

struct Direction {
  Lang src = Lang::EN;
  Lang tgt = Lang::OM;
};

inline Direction parse_direction(std::string_view s) {
  if (s == "en-om") return {Lang::EN, Lang::OM};
  if (s == "om-en") return {Lang::OM, Lang::EN};
  throw Error(ErrorKind::InvalidArgument, "invalid_direction",
              "direction must be en-om or om-en");
}

inline std::string to_string(Direction d) {
  return std::string(parcorp::to_string(d.src)) + "-" + std::string(parcorp::to_string(d.tgt));
}

// Client for an external MT server speaking POST {text, direction} ->
// {translation}. Any transport or protocol failure reads as "no answer".
class ExternalTranslator {
 public:
  explicit ExternalTranslator(const TranslatorBinding& binding) : timeout_s_(binding.timeout_s) {
    const std::string& url = binding.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "invalid_config", "translator endpoint must be a URL");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    base_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  std::optional<std::string> translate(const std::string& text, Direction direction) const {
    httplib::Client client(base_);
    const auto usec = static_cast<long long>(timeout_s_ * 1e6);
    const std::chrono::microseconds timeout(usec);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    const json body = {{"text", text}, {"direction", to_string(direction)}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("translation") ||
        !reply["translation"].is_string()) {
      return std::nullopt;
    }
    return reply["translation"].get<std::string>();
  }

 private:
  std::string base_;
  std::string path_;
  double timeout_s_;
};

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Precondition:
    case ErrorKind::Data: return 422;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Conflict: return 409;
    case ErrorKind::Unauthorized: return 401;
    case ErrorKind::Unavailable: return 503;
    case ErrorKind::Store: return 500;
  }
  return 500;
}

class Service {
 public:
  Service(cep::Platform& platform, AppConfig config)
      : platform_(platform), config_(std::move(config)) {
    if (config_.translator.kind == TranslatorKind::ExternalHttp) {
      translator_.emplace(config_.translator);
    }
    routes();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;
  ~Service() { stop(); }

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
      throw Error(ErrorKind::Store, "bind_failed", "cannot listen on " + host + ":" + std::to_string(port));
    }
    port_ = bound;
    return bound;
  }

  /// Blocks until stop().
  void listen() { server_.listen_after_bind(); }

  void start() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  using Request = httplib::Request;
  using Response = httplib::Response;
  using Handler = std::function<void(const Request&, Response&)>;

  static void send(Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(Response& res, int status, const std::string& reason, const std::string& message) {
    send(res, status, {{"reason", reason}, {"message", message}});
  }

  // Uniform error translation for every handler.
  static Handler guarded(Handler h) {
    return [h = std::move(h)](const Request& req, Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.kind()), e.reason(), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "invalid_json", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal_error", e.what());
      }
    };
  }

  static json body_of(const Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "invalid_body", "body must be a JSON object");
    return j;
  }

  static std::string bearer(const Request& req) {
    const auto h = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (h.size() <= prefix.size() || h.compare(0, prefix.size(), prefix) != 0) return "";
    return h.substr(prefix.size());
  }

  std::string contributor(const Request& req) const {
    const auto token = bearer(req);
    if (token.empty()) throw Error(ErrorKind::Unauthorized, "missing_token", "bearer token required");
    return platform_.authenticate(token);
  }

  void require_admin(const Request& req) const {
    const auto token = bearer(req);
    if (config_.admin_token.empty() || token != config_.admin_token) {
      throw Error(ErrorKind::Unauthorized, "admin_required", "admin token required");
    }
  }

  // Any contributor token or the admin token.
  void require_any(const Request& req) const {
    if (!config_.admin_token.empty() && bearer(req) == config_.admin_token) return;
    contributor(req);
  }

  static std::string string_field(const json& body, const char* name) {
    if (!body.contains(name) || !body[name].is_string()) {
      throw Error(ErrorKind::InvalidArgument, std::string("missing_") + name,
                  std::string("field '") + name + "' must be a string");
    }
    return body[name].get<std::string>();
  }

  void routes() {
    server_.set_payload_max_length(64 << 20);
    if (!config_.static_dir.empty()) server_.set_mount_point("/", config_.static_dir);

    server_.Get("/api/health", guarded([](const Request&, Response& res) {
      send(res, 200, {{"status", "ok"}});
    }));

    server_.Post("/api/contributors", guarded([this](const Request& req, Response& res) {
      const json body = body_of(req);
      const auto r = platform_.register_contributor(string_field(body, "handle"));
      json out = r.profile;
      out["token"] = r.token;
      send(res, 201, out);
    }));

    server_.Get("/api/batch", guarded([this](const Request& req, Response& res) {
      const auto who = contributor(req);
      const auto kind = req.get_param_value("kind");
      if (kind != "translate" && kind != "verify") {
        throw Error(ErrorKind::InvalidArgument, "invalid_kind", "kind must be translate or verify");
      }
      send(res, 200, platform_.request_batch(who, json(kind).get<cep::BatchKind>()));
    }));

    server_.Post("/api/translations", guarded([this](const Request& req, Response& res) {
      const auto who = contributor(req);
      const json body = body_of(req);
      const auto item = string_field(body, "item_id");
      if (!body.contains("texts") || !body["texts"].is_array()) {
        throw Error(ErrorKind::InvalidArgument, "missing_texts", "field 'texts' must be an array");
      }
      std::vector<std::string> texts;
      for (const auto& t : body["texts"]) {
        if (!t.is_string()) throw Error(ErrorKind::InvalidArgument, "missing_texts", "texts must be strings");
        texts.push_back(t.get<std::string>());
      }
      send(res, 201, {{"candidates", platform_.submit_translation(who, item, texts)}});
    }));

    server_.Post("/api/skips", guarded([this](const Request& req, Response& res) {
      const auto who = contributor(req);
      platform_.skip_item(who, string_field(body_of(req), "item_id"));
      res.status = 204;
    }));

    server_.Post("/api/verifications", guarded([this](const Request& req, Response& res) {
      const auto who = contributor(req);
      const json body = body_of(req);
      const auto item = string_field(body, "item_id");
      if (!body.contains("rating") || !body["rating"].is_number_integer()) {
        throw Error(ErrorKind::Precondition, "rating_out_of_range", "rating must be an integer in 1..5");
      }
      const auto rating = body["rating"].get<long long>();
      if (rating < 1 || rating > 5) {
        throw Error(ErrorKind::Precondition, "rating_out_of_range", "rating must be in 1..5");
      }
      std::optional<std::string> alternative;
      if (body.contains("alternative") && !body["alternative"].is_null()) {
        alternative = string_field(body, "alternative");
      }
      const auto out = platform_.submit_verification(who, item, static_cast<int>(rating), alternative);
      send(res, 201, {{"verification", out.verification},
                      {"status", out.status},
                      {"alternative_candidate", out.alternative}});
    }));

    server_.Get("/api/leaderboard", guarded([this](const Request& req, Response& res) {
      std::size_t limit = 10;
      if (req.has_param("limit")) {
        const auto raw = req.get_param_value("limit");
        try {
          std::size_t used = 0;
          const long long n = std::stoll(raw, &used);
          if (used != raw.size() || n < 1) throw std::out_of_range("limit");
          limit = static_cast<std::size_t>(n);
        } catch (const std::exception&) {
          throw Error(ErrorKind::InvalidArgument, "invalid_limit", "limit must be a positive integer");
        }
      }
      send(res, 200, platform_.leaderboard(limit));
    }));

    server_.Get(R"(/api/profile/([^/]+))", guarded([this](const Request& req, Response& res) {
      const auto who = contributor(req);
      if (req.matches[1] != who) {
        throw Error(ErrorKind::NotFound, "unknown_profile", "no such profile");
      }
      send(res, 200, platform_.profile(who));
    }));

    server_.Post("/api/translate", guarded([this](const Request& req, Response& res) {
      const json body = body_of(req);
      const auto text = string_field(body, "text");
      const auto direction = parse_direction(body.value("direction", std::string("en-om")));
      const std::string normalized = normalize_text(text, direction.src);
      if (normalized.empty()) throw Error(ErrorKind::Precondition, "empty_text", "text is empty");
      if (auto hit = platform_.translation_memory(normalized, direction.src)) {
        send(res, 200, {{"translation", *hit}, {"source", "memory"}});
        return;
      }
      if (translator_) {
        if (auto reply = translator_->translate(normalized, direction)) {
          send(res, 200, {{"translation", *reply}, {"source", "external"}});
          return;
        }
      }
      throw Error(ErrorKind::Unavailable, "translator_unavailable", "no translation available");
    }));

    server_.Post("/api/admin/documents", guarded([this](const Request& req, Response& res) {
      require_admin(req);
      const json body = body_of(req);
      const Lang src = parse_lang(body.value("src_lang", std::string("en")));
      const json meta = body.contains("meta") ? body["meta"] : json::object();
      const auto id = platform_.stage_document(src, string_field(body, "src_doc"),
                                               string_field(body, "tgt_doc"), meta);
      send(res, 202, {{"id", id}, {"status", "staged"}});
    }));

    server_.Post(R"(/api/admin/documents/([^/]+)/align)", guarded([this](const Request& req, Response& res) {
      require_admin(req);
      send(res, 200, platform_.align_document(req.matches[1]));
    }));

    server_.Post("/api/admin/sources", guarded([this](const Request& req, Response& res) {
      require_admin(req);
      const json body = body_of(req);
      const Lang lang = parse_lang(body.value("lang", std::string("en")));
      if (!body.contains("texts") || !body["texts"].is_array()) {
        throw Error(ErrorKind::InvalidArgument, "missing_texts", "field 'texts' must be an array");
      }
      const auto texts = body["texts"].get<std::vector<std::string>>();
      const auto report = platform_.add_sources(lang, texts, body.value("source_doc", std::string("admin")));
      send(res, 201, report);
    }));

    server_.Get("/api/export", guarded([this](const Request& req, Response& res) {
      require_any(req);
      ExportOptions options;
      if (req.has_param("status")) options.filter = parse_export_filter(req.get_param_value("status"));
      if (req.has_param("format") && req.get_param_value("format") != "bitext") {
        throw Error(ErrorKind::InvalidArgument, "invalid_format", "only the bitext format is supported");
      }
      if (req.has_param("seed")) {
        try {
          options.seed = std::stoull(req.get_param_value("seed"));
        } catch (const std::exception&) {
          throw Error(ErrorKind::InvalidArgument, "invalid_seed", "seed must be an unsigned integer");
        }
      }
      if (req.has_param("direction")) options.src_lang = parse_direction(req.get_param_value("direction")).src;
      const auto bundle = export_corpus(platform_.pairs(), options);
      send(res, 200, {{"manifest", bundle.manifest}, {"files", bundle.files}});
    }));

    server_.Get("/api/stats", guarded([this](const Request& req, Response& res) {
      require_any(req);
      send(res, 200, platform_.stats());
    }));
  }

  cep::Platform& platform_;
  AppConfig config_;
  std::optional<ExternalTranslator> translator_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace parcorp::service
