#pragma once

// Operator configuration: one JSON file plus environment overrides.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "parcorp/align.hpp"
#include "parcorp/bleu.hpp"
#include "parcorp/cep/platform.hpp"
#include "parcorp/cep/policy.hpp"
#include "parcorp/error.hpp"
#include "parcorp/filter.hpp"
#include "parcorp/types.hpp"

namespace parcorp {

enum class TranslatorKind { TranslationMemory, ExternalHttp };
NLOHMANN_JSON_SERIALIZE_ENUM(TranslatorKind, {{TranslatorKind::TranslationMemory, "memory"},
                                              {TranslatorKind::ExternalHttp, "external"}})

struct TranslatorBinding {
  TranslatorKind kind = TranslatorKind::TranslationMemory;
  std::string endpoint;      // ExternalHttp only, e.g. http://127.0.0.1:5000/translate
  double timeout_s = 10.0;

  bool operator==(const TranslatorBinding&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TranslatorBinding, kind, endpoint, timeout_s)

struct AppConfig {
  std::string store_path = "parcorp-store";
  std::string listen = "127.0.0.1:8080";
  std::string admin_token;  // empty disables admin endpoints
  std::string static_dir;   // optional directory served at /
  TranslatorBinding translator;
  FilterRule filter;
  aligner::AlignmentParams alignment;
  bleu::BleuConfig bleu;
  cep::CepConfig cep;

  cep::PlatformConfig platform() const { return {filter, alignment, cep}; }

  void validate() const {
    filter.validate();
    alignment.validate();
    bleu.validate();
    cep.validate();
    if (translator.kind == TranslatorKind::ExternalHttp && translator.endpoint.empty()) {
      throw Error(ErrorKind::InvalidArgument, "invalid_config", "external translator needs an endpoint");
    }
    if (!(translator.timeout_s > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "invalid_config", "translator timeout must be positive");
    }
  }

  bool operator==(const AppConfig&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AppConfig, store_path, listen, admin_token,
                                                static_dir, translator, filter, alignment, bleu,
                                                cep)

struct ListenAddress {
  std::string host;
  int port = 0;
};

inline ListenAddress parse_listen(std::string_view listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid_listen", "listen must be host:port");
  }
  ListenAddress out{std::string(listen.substr(0, colon)), 0};
  try {
    std::size_t used = 0;
    const std::string port(listen.substr(colon + 1));
    out.port = std::stoi(port, &used);
    if (used != port.size() || out.port < 0 || out.port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "invalid_listen", "bad port in '" + std::string(listen) + "'");
  }
  return out;
}

/// Environment variables that override file settings.
inline void apply_env(AppConfig& config) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("PARCORP_STORE")) config.store_path = *v;
  if (auto v = env("PARCORP_LISTEN")) config.listen = *v;
  if (auto v = env("PARCORP_ADMIN_TOKEN")) config.admin_token = *v;
  if (auto v = env("PARCORP_TRANSLATOR_URL")) {
    config.translator.kind = TranslatorKind::ExternalHttp;
    config.translator.endpoint = *v;
  }
}

inline AppConfig parse_config(std::string_view text) {
  try {
    AppConfig config = json::parse(text).get<AppConfig>();
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "invalid_config", e.what());
  }
}

/// Reads `path` (or $PARCORP_CONFIG when empty; defaults when neither is
/// set) and then applies environment overrides.
inline AppConfig load_config(std::optional<std::filesystem::path> path) {
  if (!path) {
    if (const char* v = std::getenv("PARCORP_CONFIG"); v && *v) path = v;
  }
  AppConfig config;
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Data, "unreadable_file", "cannot read config " + path->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    config = parse_config(ss.str());
  }
  apply_env(config);
  config.validate();
  return config;
}

}  // namespace parcorp
