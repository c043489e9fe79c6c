#include "snowclone/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "numfmt.hpp"
#include "snowclone/kernels.hpp"

#ifndef SNOWCLONE_BUILD_INFO
#define SNOWCLONE_BUILD_INFO "unknown"
#endif

namespace snowclone {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Seeds

namespace {

std::string require_string(const json& j, const char* key, bool allow_empty) {
  if (!j.contains(key) || !j[key].is_string()) throw ConfigError(std::string("seed record lacks string '") + key + "'");
  std::string v = j[key].get<std::string>();
  if (!allow_empty && v.empty()) throw ConfigError(std::string("seed record has empty '") + key + "'");
  return v;
}

}  // namespace

std::vector<SeedEntry> read_seed_file(std::istream& in) {
  std::vector<SeedEntry> seeds;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      SeedEntry s;
      s.seed_id = require_string(j, "seed_id", false);
      if (!j.contains("quote") || !j["quote"].is_array()) throw ConfigError("seed record lacks array 'quote'");
      std::string text;
      for (const auto& t : j["quote"]) {
        if (!t.is_string()) throw ConfigError("'quote' must hold strings");
        if (!text.empty()) text.push_back(' ');
        text += t.get<std::string>();
      }
      s.quote = tokenize(text);
      if (s.quote.empty()) throw ConfigError("seed '" + s.seed_id + "' has an empty quote");
      s.origin_title = require_string(j, "origin_title", true);
      s.origin_note = j.contains("origin_note") && j["origin_note"].is_string() ? j["origin_note"].get<std::string>() : "";
      if (!ids.insert(s.seed_id).second) throw ConfigError("duplicate seed id '" + s.seed_id + "'");
      seeds.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ConfigError("seed file line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("seed file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return seeds;
}

std::vector<SeedEntry> load_seed_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open seed file '" + path.string() + "'");
  return read_seed_file(in);
}

void write_seed_file(std::ostream& out, std::span<const SeedEntry> seeds) {
  for (const auto& s : seeds) {
    json j;
    j["seed_id"] = s.seed_id;
    j["quote"] = s.quote.tokens();
    j["origin_title"] = s.origin_title;
    j["origin_note"] = s.origin_note;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Config

void ServiceConfig::validate() const {
  try {
    lsh.validate();
  } catch (const IndexError& e) {
    throw ConfigError(e.what());
  }
  if (port < 0 || port > 65535) throw ConfigError("port out of range");
  if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0)) throw ConfigError("jaccard_threshold must be in [0,1]");
  if (max_body_bytes == 0) throw ConfigError("max_body_bytes must be positive");
  if (min_candidate_tokens == 0 || max_candidate_tokens < min_candidate_tokens)
    throw ConfigError("candidate token bounds must satisfy 1 <= min <= max");
}

void ServiceConfig::save(std::ostream& out) const {
  out << "config_version=" << kVersion << '\n'
      << "host=" << host << '\n'
      << "port=" << port << '\n'
      << "lsh_k=" << lsh.k << '\n'
      << "lsh_b=" << lsh.bands << '\n'
      << "lsh_r=" << lsh.rows << '\n'
      << "lsh_hash_seed=" << lsh.hash_seed << '\n'
      << "jaccard_threshold=" << detail::fmt_double(jaccard_threshold) << '\n'
      << "max_body_bytes=" << max_body_bytes << '\n'
      << "min_candidate_tokens=" << min_candidate_tokens << '\n'
      << "max_candidate_tokens=" << max_candidate_tokens << '\n'
      << "model_dir=" << model_dir.string() << '\n'
      << "seed_file=" << seed_file.string() << '\n';
}

ServiceConfig ServiceConfig::parse(std::istream& in) {
  ServiceConfig c;
  bool versioned = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "config_version") {
        if (detail::parse_u64(value) != static_cast<unsigned>(kVersion))
          throw ConfigError("unsupported config_version " + value);
        versioned = true;
      } else if (key == "host") c.host = value;
      else if (key == "port") c.port = static_cast<int>(detail::parse_u64(value));
      else if (key == "lsh_k") c.lsh.k = detail::parse_u64(value);
      else if (key == "lsh_b") c.lsh.bands = detail::parse_u64(value);
      else if (key == "lsh_r") c.lsh.rows = detail::parse_u64(value);
      else if (key == "lsh_hash_seed") c.lsh.hash_seed = detail::parse_u64(value);
      else if (key == "jaccard_threshold") c.jaccard_threshold = detail::parse_double(value);
      else if (key == "max_body_bytes") c.max_body_bytes = detail::parse_u64(value);
      else if (key == "min_candidate_tokens") c.min_candidate_tokens = detail::parse_u64(value);
      else if (key == "max_candidate_tokens") c.max_candidate_tokens = detail::parse_u64(value);
      else if (key == "model_dir") c.model_dir = value;
      else if (key == "seed_file") c.seed_file = value;
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!versioned) throw ConfigError("config lacks config_version");
  c.validate();
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  ServiceConfig c = parse(in);
  // Relative paths are relative to the config file.
  const auto base = path.parent_path();
  if (c.model_dir.is_relative()) c.model_dir = base / c.model_dir;
  if (c.seed_file.is_relative()) c.seed_file = base / c.seed_file;
  return c;
}

// ---------------------------------------------------------------------------
// Candidates and scanning

std::vector<Candidate> extract_candidates(std::string_view text, std::size_t min_tokens, std::size_t max_tokens) {
  std::vector<Candidate> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    if (end > start) {
      TokenSeq toks = tokenize(text.substr(start, end - start), start);
      if (toks.size() >= min_tokens && toks.size() <= max_tokens) {
        const CharSpan span = toks.source_span();
        out.push_back({std::move(toks), span});
      }
    }
    start = end + 1;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '.' || ch == '!' || ch == '?' || ch == '\n' || ch == '\r') emit(i);
  }
  emit(text.size());
  return out;
}

bool Annotation::exact() const noexcept { return std::isinf(score) && score > 0; }

namespace {

struct ScanContext {
  std::span<const SeedEntry> seeds;
  const LshIndex& index;
  std::span<const std::size_t> entry_to_seed;
  std::span<const TagSeq> seed_tags;
  const DetectorModel& detector;
  const IdfTable& idf;
  const ScanOptions& options;
};

std::vector<Annotation> scan_impl(std::string_view text, const ScanContext& ctx) {
  const auto candidates = extract_candidates(text, ctx.options.min_candidate_tokens, ctx.options.max_candidate_tokens);

  std::unordered_map<std::string, std::size_t> verbatim;
  for (std::size_t s = 0; s < ctx.seeds.size(); ++s) verbatim.try_emplace(ctx.seeds[s].quote.joined(), s);

  std::vector<std::optional<Annotation>> found(candidates.size());
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t ci = 0; ci < n; ++ci) {
    const Candidate& cand = candidates[ci];
    const std::size_t begin = cand.span.start, end = cand.span.end;

    if (const auto it = verbatim.find(cand.tokens.joined()); it != verbatim.end()) {
      found[ci] = Annotation{begin, end, ctx.seeds[it->second].seed_id, std::numeric_limits<double>::infinity(),
                             std::string(text.substr(begin, end - begin))};
      continue;
    }

    const MinHashSignature sig = ctx.index.signature_of(cand.tokens);
    std::optional<std::size_t> best_seed;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const std::size_t entry : ctx.index.query_signature(sig)) {
      if (estimate_jaccard(sig, ctx.index.entries()[entry].signature) < ctx.options.jaccard_threshold) continue;
      const std::size_t s = ctx.entry_to_seed[entry];
      const DetectorFeatures f =
          extract_features_with_tags(ctx.seeds[s].quote, cand.tokens, ctx.seed_tags[s], ctx.idf);
      const Classification c = ctx.detector.decide(f);
      if (c.label == Label::Reference && c.score > best_score) {
        best_score = c.score;
        best_seed = s;
      }
    }
    if (best_seed)
      found[ci] = Annotation{begin, end, ctx.seeds[*best_seed].seed_id, best_score,
                             std::string(text.substr(begin, end - begin))};
  }

  std::vector<Annotation> out;
  for (auto& a : found)
    if (a) out.push_back(std::move(*a));
  return out;
}

std::vector<std::size_t> map_entries(std::span<const SeedEntry> seeds, const LshIndex& ix) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t s = 0; s < seeds.size(); ++s) by_id.emplace(seeds[s].seed_id, s);
  std::vector<std::size_t> out;
  out.reserve(ix.size());
  for (const auto& e : ix.entries()) {
    const auto it = by_id.find(e.id);
    if (it == by_id.end()) throw ConfigError("index entry '" + e.id + "' has no seed");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::vector<Annotation> scan(std::string_view text, std::span<const SeedEntry> seeds, const LshIndex& ix,
                             const DetectorModel& d, const TaggerModel& m, const IdfTable& idf,
                             const ScanOptions& options) {
  if (seeds.empty()) throw ConfigError("no seeds loaded");
  const auto entry_to_seed = map_entries(seeds, ix);
  std::vector<TagSeq> tags;
  tags.reserve(seeds.size());
  for (const auto& s : seeds) tags.push_back(tag(m, s.quote));
  return scan_impl(text, ScanContext{seeds, ix, entry_to_seed, tags, d, idf, options});
}

ScanEngine::ScanEngine(std::vector<SeedEntry> seeds, const LshParams& lsh, DetectorModel detector, TaggerModel tagger,
                       std::shared_ptr<const IdfTable> idf, ScanOptions options)
    : seeds_(std::move(seeds)),
      index_([&] {
        if (seeds_.empty()) throw ConfigError("no seeds loaded");
        std::vector<std::pair<std::string, TokenSeq>> entries;
        for (const auto& s : seeds_) entries.emplace_back(s.seed_id, s.quote);
        return LshIndex::build(entries, lsh);
      }()),
      detector_(std::move(detector)),
      tagger_(std::move(tagger)),
      idf_(std::move(idf)),
      options_(options) {
  if (!idf_) throw ConfigError("scan engine needs an idf table");
  for (const auto& s : seeds_) seed_tags_.push_back(snowclone::tag(tagger_, s.quote));
}

std::shared_ptr<const ScanEngine> ScanEngine::from_config(const ServiceConfig& config) {
  config.validate();
  auto open = [&](const char* name) {
    const auto path = config.model_dir / name;
    auto in = std::make_unique<std::ifstream>(path);
    if (!*in) throw ConfigError("cannot open model file '" + path.string() + "'");
    return in;
  };
  auto idf = std::make_shared<const IdfTable>(IdfTable::load(*open(model_files::kIdf)));
  TaggerModel tagger = TaggerModel::load(*open(model_files::kTagger), idf);
  DetectorModel detector = DetectorModel::load(*open(model_files::kDetector));
  ScanOptions opts{config.jaccard_threshold, config.min_candidate_tokens, config.max_candidate_tokens};
  return std::make_shared<const ScanEngine>(load_seed_file(config.seed_file), config.lsh, std::move(detector),
                                            std::move(tagger), std::move(idf), opts);
}

std::vector<Annotation> ScanEngine::scan(std::string_view text) const {
  std::vector<std::size_t> identity(seeds_.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  return scan_impl(text, ScanContext{seeds_, index_, identity, seed_tags_, detector_, *idf_, options_});
}

const SeedEntry* ScanEngine::find_seed(const std::string& id) const {
  for (const auto& s : seeds_)
    if (s.seed_id == id) return &s;
  return nullptr;
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

HttpReply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

}  // namespace

void AnnotationService::install(std::shared_ptr<const ScanEngine> engine) {
  std::lock_guard lock(mu_);
  engine_ = std::move(engine);
}

bool AnnotationService::ready() const { return engine() != nullptr; }

std::shared_ptr<const ScanEngine> AnnotationService::engine() const {
  std::lock_guard lock(mu_);
  return engine_;
}

HttpReply AnnotationService::annotate(std::string_view body) const {
  if (body.size() > max_body_bytes_) return error_reply(413, "request body exceeds " + std::to_string(max_body_bytes_) + " bytes");
  const auto eng = engine();
  if (!eng) return error_reply(503, "models are loading");
  if (body.empty()) return error_reply(400, "empty request body");
  json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_reply(400, "body must be a JSON object");
  if (!req.contains("text") || !req["text"].is_string()) return error_reply(400, "body must carry a string 'text'");

  const std::string text = req["text"].get<std::string>();
  json list = json::array();
  for (const auto& a : eng->scan(text)) {
    json item{{"char_start", a.char_start},
              {"char_end", a.char_end},
              {"seed_id", a.seed_id},
              {"score", a.exact() ? std::numeric_limits<double>::max() : a.score},
              {"exact", a.exact()},
              {"matched_text", a.matched_text}};
    if (const SeedEntry* s = eng->find_seed(a.seed_id)) {
      item["origin_title"] = s->origin_title;
      item["seed_quote"] = s->quote.joined();
    }
    list.push_back(std::move(item));
  }
  return {200, json{{"annotations", std::move(list)}}.dump()};
}

HttpReply AnnotationService::seeds() const {
  const auto eng = engine();
  if (!eng) return error_reply(503, "models are loading");
  json list = json::array();
  for (const auto& s : eng->seeds())
    list.push_back({{"seed_id", s.seed_id},
                    {"quote", s.quote.tokens()},
                    {"origin_title", s.origin_title},
                    {"origin_note", s.origin_note}});
  return {200, json{{"seeds", std::move(list)}}.dump()};
}

HttpReply AnnotationService::health() const {
  return {200, json{{"status", ready() ? "ok" : "loading"},
                    {"version", kVersion},
                    {"build", SNOWCLONE_BUILD_INFO},
                    {"threads", kernels::thread_count()}}
                   .dump()};
}

struct HttpServer::Impl {
  std::shared_ptr<AnnotationService> service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(std::shared_ptr<AnnotationService> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto& srv = impl_->server;
  auto svc = impl_->service;
  auto reply = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.set_payload_max_length(svc->max_body_bytes());
  srv.Post("/annotate", [svc, reply](const httplib::Request& req, httplib::Response& res) { reply(res, svc->annotate(req.body)); });
  srv.Get("/seeds", [svc, reply](const httplib::Request&, httplib::Response& res) { reply(res, svc->seeds()); });
  srv.Get("/health", [svc, reply](const httplib::Request&, httplib::Response& res) { reply(res, svc->health()); });
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) res.set_content(json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = srv.bind_to_any_port(host);
  } else if (!srv.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void HttpServer::listen_blocking(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void serve(const ServiceConfig& config) {
  config.validate();
  auto service = std::make_shared<AnnotationService>(config.max_body_bytes);
  std::thread loader([service, config] {
    try {
      service->install(ScanEngine::from_config(config));
      std::cerr << "snowclone: models loaded, serving annotations\n";
    } catch (const std::exception& e) {
      std::cerr << "snowclone: failed to load models: " << e.what() << '\n';
    }
  });
  loader.detach();
  HttpServer server(service);
  std::cerr << "snowclone: listening on " << config.host << ':' << config.port << '\n';
  server.listen_blocking(config.host, config.port);
}

}  // namespace snowclone
