// parcorp: operator command line for the parallel corpus platform.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parcorp/bleu.hpp"
#include "parcorp/cep/platform.hpp"
#include "parcorp/config.hpp"
#include "parcorp/error.hpp"
#include "parcorp/export.hpp"
#include "parcorp/service/http.hpp"
#include "parcorp/text.hpp"

namespace fs = std::filesystem;
using namespace parcorp;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kStore = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return kUsage;
    case ErrorKind::Store:
    case ErrorKind::Unavailable: return kStore;
    default: return kData;
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, "unreadable_file", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (!valid_utf8(text)) throw Error(ErrorKind::Data, "invalid_utf8", path.string() + " is not UTF-8");
  return text;
}

// Lines without their terminators; a final newline does not start a line.
std::vector<std::string> read_lines(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

struct Globals {
  std::string store;
  std::string config_path;
  bool json_out = false;
};

AppConfig config_for(const Globals& g) {
  AppConfig config = load_config(g.config_path.empty() ? std::nullopt : std::optional<fs::path>(g.config_path));
  if (!g.store.empty()) config.store_path = g.store;
  return config;
}

std::unique_ptr<cep::Platform> open_platform(const AppConfig& config) {
  return std::make_unique<cep::Platform>(config.platform(), fs::path(config.store_path));
}

void emit(const Globals& g, const json& report, const std::string& human) {
  if (g.json_out) {
    std::cout << report.dump() << "\n";
  } else {
    std::cout << human;
  }
}

std::string dropped_text(const json& dropped) {
  std::string out;
  for (const auto& [reason, n] : dropped.items()) out += " " + reason + "=" + std::to_string(n.get<std::size_t>());
  return out.empty() ? " none" : out;
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parcorp: English-Afaan Oromo parallel corpus platform"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--store", g.store, "Store directory (overrides config)");
  app.add_option("--config", g.config_path, "Config file (default $PARCORP_CONFIG)");
  app.add_flag("--json", g.json_out, "Machine-readable output");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Ingest a bitext or a document pair");
  std::string src_file, tgt_file, format = "bitext", src_lang = "en", source_name;
  ingest->add_option("src", src_file, "Source-language file")->required();
  ingest->add_option("tgt", tgt_file, "Target-language file")->required();
  ingest->add_option("--format", format, "bitext or docpair")->check(CLI::IsMember({"bitext", "docpair"}));
  ingest->add_option("--src-lang", src_lang, "Language of the source file")->check(CLI::IsMember({"en", "om"}));
  ingest->add_option("--source", source_name, "Provenance name (default: source file stem)");

  // add-sources
  auto* add_sources = app.add_subcommand("add-sources", "Add monolingual sentences to the translation pool");
  std::string sources_file, sources_lang = "en";
  add_sources->add_option("file", sources_file, "One sentence per line")->required();
  add_sources->add_option("--lang", sources_lang)->check(CLI::IsMember({"en", "om"}));

  // align
  auto* align = app.add_subcommand("align", "Align staged document pairs");
  std::vector<std::string> doc_ids;
  bool align_all = false;
  align->add_option("doc", doc_ids, "Staged document ids");
  align->add_flag("--all", align_all, "Align every unaligned document");

  // export
  auto* exp = app.add_subcommand("export", "Write train/dev/test bitext files");
  std::string out_dir, status = "verified", direction = "en-om";
  std::uint64_t seed = 0;
  std::vector<double> ratios = {0.8, 0.1, 0.1};
  exp->add_option("--out", out_dir, "Output directory")->required();
  exp->add_option("--status", status, "verified, verified+pending or all");
  exp->add_option("--seed", seed, "Shuffle seed");
  exp->add_option("--ratios", ratios, "train,dev,test")->delimiter(',')->expected(3);
  exp->add_option("--direction", direction, "en-om or om-en")->check(CLI::IsMember({"en-om", "om-en"}));

  // bleu
  auto* bleu_cmd = app.add_subcommand("bleu", "Corpus BLEU of a candidate file against references");
  std::string cand_file;
  std::vector<std::string> ref_files;
  int max_n = 4;
  bool lowercase = false;
  std::string smoothing = "none";
  bleu_cmd->add_option("candidate", cand_file, "Candidate translations, one per line")->required();
  bleu_cmd->add_option("references", ref_files, "Reference files, line-aligned")->required();
  bleu_cmd->add_option("--max-n", max_n, "Highest n-gram order");
  bleu_cmd->add_flag("--lowercase", lowercase, "Compare lowercased tokens");
  bleu_cmd->add_option("--smoothing", smoothing, "none or add_epsilon")->check(CLI::IsMember({"none", "add_epsilon"}));

  auto* stats = app.add_subcommand("stats", "Corpus and contributor statistics");
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  auto* snapshot = app.add_subcommand("snapshot", "Write a state snapshot to the store");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*bleu_cmd) {
      // Pure computation; no store or config needed beyond BLEU defaults.
      bleu::BleuConfig cfg = g.config_path.empty() ? bleu::BleuConfig{} : config_for(g).bleu;
      cfg.max_n = max_n;
      cfg.weights.clear();
      if (lowercase) cfg.case_mode = bleu::CaseMode::Lowercased;
      cfg.smoothing = smoothing == "add_epsilon" ? bleu::Smoothing::AddEpsilon : bleu::Smoothing::None;
      cfg.validate();
      const auto cands = read_lines(cand_file);
      std::vector<std::vector<std::string>> ref_lines;
      for (const auto& f : ref_files) {
        ref_lines.push_back(read_lines(f));
        if (ref_lines.back().size() != cands.size()) {
          throw Error(ErrorKind::Data, "line_count_mismatch",
                      f + " has " + std::to_string(ref_lines.back().size()) + " lines, candidate has " +
                          std::to_string(cands.size()));
        }
      }
      if (cands.empty()) throw Error(ErrorKind::Data, "empty_corpus", "candidate file is empty");
      std::vector<bleu::Tokens> c;
      std::vector<std::vector<bleu::Tokens>> r(cands.size());
      for (std::size_t i = 0; i < cands.size(); ++i) {
        c.push_back(tokenize(normalize_text(cands[i])));
        for (const auto& refs : ref_lines) r[i].push_back(tokenize(normalize_text(refs[i])));
      }
      const auto report = bleu::corpus_bleu(c, r, cfg);
      std::ostringstream human;
      human << "BLEU = " << report.score * 100.0 << " (BP=" << report.brevity_penalty
            << ", c=" << report.candidate_len << ", r=" << report.reference_len << ")\n";
      for (std::size_t n = 0; n < report.precisions.size(); ++n) {
        const auto& p = report.precisions[n];
        human << "  p" << n + 1 << " = " << p.clipped << "/" << p.total << " = " << p.value << "\n";
      }
      emit(g, report, human.str());
      return kOk;
    }

    const AppConfig config = config_for(g);

    if (*serve) {
      const auto addr = parse_listen(config.listen);
      auto platform = open_platform(config);
      if (platform->recovery().truncated) {
        std::cerr << "warning: store recovered at event " << platform->recovery().last_seq << "\n";
      }
      service::Service svc(*platform, config);
      const int port = svc.bind(addr.host, addr.port);
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      svc.start();
      emit(g, {{"listening", addr.host + ":" + std::to_string(port)}},
           "listening on " + addr.host + ":" + std::to_string(port) + "\n");
      std::cout.flush();
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      svc.stop();
      platform->snapshot();
      return kOk;
    }

    auto platform = open_platform(config);

    if (*ingest) {
      const Lang src = parse_lang(src_lang);
      const std::string name = source_name.empty() ? fs::path(src_file).stem().string() : source_name;
      if (format == "docpair") {
        const auto id = platform->stage_document(src, read_text(src_file), read_text(tgt_file),
                                                 {{"src_file", src_file}, {"tgt_file", tgt_file}});
        emit(g, {{"staged", id}}, "staged " + id + "\n");
        return kOk;
      }
      const auto a = read_lines(src_file);
      const auto b = read_lines(tgt_file);
      if (a.size() != b.size()) {
        throw Error(ErrorKind::Data, "line_count_mismatch",
                    src_file + " has " + std::to_string(a.size()) + " lines, " + tgt_file + " has " +
                        std::to_string(b.size()));
      }
      std::vector<std::pair<std::string, std::string>> rows;
      for (std::size_t i = 0; i < a.size(); ++i) rows.emplace_back(a[i], b[i]);
      const auto report = platform->ingest_pairs(rows, src, name);
      json j = report;
      j.erase("ids");
      emit(g, j,
           "lines " + std::to_string(report.lines) + ", added " + std::to_string(report.added) +
               ", duplicates " + std::to_string(report.duplicates) + ", dropped" +
               dropped_text(json(report.dropped)) + "\n");
      return kOk;
    }

    if (*add_sources) {
      const auto report = platform->add_sources(parse_lang(sources_lang), read_lines(sources_file),
                                                fs::path(sources_file).stem().string());
      json j = report;
      j.erase("ids");
      emit(g, j,
           "added " + std::to_string(report.added) + ", duplicates " + std::to_string(report.duplicates) +
               ", dropped" + dropped_text(json(report.dropped)) + "\n");
      return kOk;
    }

    if (*align) {
      if (align_all) {
        for (const auto& id : platform->unaligned_documents()) doc_ids.push_back(id);
      } else if (doc_ids.empty()) {
        throw Error(ErrorKind::InvalidArgument, "missing_document", "give document ids or --all");
      }
      json reports = json::array();
      std::string human;
      for (const auto& id : doc_ids) {
        json r = platform->align_document(id);
        r.erase("ids");
        human += id + ": links " + std::to_string(r["links"].get<std::size_t>()) + ", added " +
                 std::to_string(r["added"].get<std::size_t>()) + ", duplicates " +
                 std::to_string(r["duplicates"].get<std::size_t>()) + ", dropped" + dropped_text(r["dropped"]) + "\n";
        reports.push_back(std::move(r));
      }
      emit(g, reports, human.empty() ? "nothing to align\n" : human);
      return kOk;
    }

    if (*exp) {
      ExportOptions options;
      options.filter = parse_export_filter(status);
      options.seed = seed;
      options.ratios = {ratios.at(0), ratios.at(1), ratios.at(2)};
      options.src_lang = service::parse_direction(direction).src;
      const auto bundle = export_corpus(platform->pairs(), options);
      write_bundle(bundle, out_dir);
      const auto& counts = bundle.manifest["counts"];
      emit(g, bundle.manifest,
           "exported " + std::to_string(bundle.manifest["total"].get<std::size_t>()) + " pairs (train " +
               std::to_string(counts["train"].get<std::size_t>()) + ", dev " +
               std::to_string(counts["dev"].get<std::size_t>()) + ", test " +
               std::to_string(counts["test"].get<std::size_t>()) + ") to " + out_dir + "\n");
      return kOk;
    }

    if (*stats) {
      const json s = platform->stats();
      std::ostringstream human;
      human << "pairs " << s["pairs"]["total"] << " (verified " << s["pairs"]["by_status"]["verified"]
            << ", pending " << s["pairs"]["by_status"]["pending"] << ", rejected "
            << s["pairs"]["by_status"]["rejected"] << ")\n"
            << "origin: document_aligned " << s["pairs"]["by_origin"]["document_aligned"] << ", crowdsourced "
            << s["pairs"]["by_origin"]["crowdsourced"] << ", imported " << s["pairs"]["by_origin"]["imported"] << "\n"
            << "tokens: en " << s["tokens"]["en"] << ", om " << s["tokens"]["om"] << "\n"
            << "contributors " << s["contributors"]["total"] << ", points " << s["contributors"]["points"] << "\n";
      emit(g, s, human.str());
      return kOk;
    }

    if (*snapshot) {
      platform->snapshot();
      emit(g, {{"seq", platform->last_seq()}}, "snapshot at event " + std::to_string(platform->last_seq()) + "\n");
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.reason() << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kStore;
  }
  return kOk;
}
