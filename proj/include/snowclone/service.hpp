#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "snowclone/detector.hpp"
#include "snowclone/index.hpp"
#include "snowclone/tagger.hpp"
#include "snowclone/text.hpp"

namespace snowclone {

inline constexpr const char* kVersion = "0.3.0";

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A known quote and where it comes from.
struct SeedEntry {
  std::string seed_id;
  TokenSeq quote;
  std::string origin_title;
  std::string origin_note;
};

/// NDJSON `{seed_id, quote:[string], origin_title, origin_note}`.
std::vector<SeedEntry> read_seed_file(std::istream& in);
std::vector<SeedEntry> load_seed_file(const std::filesystem::path& path);
void write_seed_file(std::ostream& out, std::span<const SeedEntry> seeds);

/// Versioned `key=value` service configuration. Unknown keys are rejected.
struct ServiceConfig {
  static constexpr int kVersion = 1;

  std::string host = "127.0.0.1";
  int port = 8377;
  LshParams lsh{};
  double jaccard_threshold = 0.2;
  std::size_t max_body_bytes = 1 << 20;
  std::size_t min_candidate_tokens = 3;
  std::size_t max_candidate_tokens = 60;
  std::filesystem::path model_dir = "models";
  std::filesystem::path seed_file = "data/seeds.ndjson";

  void validate() const;
  void save(std::ostream& out) const;
  static ServiceConfig parse(std::istream& in);
  static ServiceConfig load(const std::filesystem::path& path);
};

struct Candidate {
  TokenSeq tokens;  // offsets are absolute within the submitted text
  CharSpan span;    // first token start .. last token end
};

/// Splits on `.`, `!`, `?` and line breaks; keeps pieces with
/// `min_tokens`..`max_tokens` tokens.
std::vector<Candidate> extract_candidates(std::string_view text, std::size_t min_tokens = 3,
                                          std::size_t max_tokens = 60);

/// A highlighted span. Exact copies of a seed carry an infinite score.
struct Annotation {
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string seed_id;
  double score = 0.0;
  std::string matched_text;

  bool exact() const noexcept;
};

struct ScanOptions {
  double jaccard_threshold = 0.2;
  std::size_t min_candidate_tokens = 3;
  std::size_t max_candidate_tokens = 60;
};

/// Finds references to `seeds` in raw text: candidate sentences are looked
/// up in the LSH index, filtered by estimated Jaccard, and the survivors go
/// through the detector. One annotation per sentence (best-scoring seed),
/// sorted by position.
std::vector<Annotation> scan(std::string_view text, std::span<const SeedEntry> seeds, const LshIndex& ix,
                             const DetectorModel& d, const TaggerModel& m, const IdfTable& idf,
                             const ScanOptions& options = {});

/// Everything `scan` needs, loaded once. Immutable and shareable.
class ScanEngine {
public:
  ScanEngine(std::vector<SeedEntry> seeds, const LshParams& lsh, DetectorModel detector, TaggerModel tagger,
             std::shared_ptr<const IdfTable> idf, ScanOptions options);

  /// Loads tagger.model, idf.tsv and detector.model from `config.model_dir`
  /// and seeds from `config.seed_file`.
  static std::shared_ptr<const ScanEngine> from_config(const ServiceConfig& config);

  std::vector<Annotation> scan(std::string_view text) const;

  const std::vector<SeedEntry>& seeds() const noexcept { return seeds_; }
  const SeedEntry* find_seed(const std::string& id) const;
  const LshIndex& index() const noexcept { return index_; }

private:
  std::vector<SeedEntry> seeds_;
  LshIndex index_;
  DetectorModel detector_;
  TaggerModel tagger_;
  std::shared_ptr<const IdfTable> idf_;
  ScanOptions options_;
  std::vector<TagSeq> seed_tags_;
};

/// Model-directory file names.
namespace model_files {
inline constexpr const char* kTagger = "tagger.model";
inline constexpr const char* kIdf = "idf.tsv";
inline constexpr const char* kDetector = "detector.model";
}  // namespace model_files

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

/// HTTP-independent request handling for the annotation endpoint.
///
///   POST /annotate {"text": "..."} -> {"annotations": [...]}
///   GET  /seeds                    -> {"seeds": [...]}
///   GET  /health                   -> {"status", "version", "build"}
///
/// Until an engine is installed every model-backed route answers 503.
class AnnotationService {
public:
  explicit AnnotationService(std::size_t max_body_bytes = 1 << 20) : max_body_bytes_(max_body_bytes) {}

  void install(std::shared_ptr<const ScanEngine> engine);
  bool ready() const;

  HttpReply annotate(std::string_view body) const;
  HttpReply seeds() const;
  HttpReply health() const;

  std::size_t max_body_bytes() const noexcept { return max_body_bytes_; }

private:
  std::shared_ptr<const ScanEngine> engine() const;

  std::size_t max_body_bytes_;
  mutable std::mutex mu_;
  std::shared_ptr<const ScanEngine> engine_;
};

/// cpp-httplib front end. `start` returns once the socket is bound.
class HttpServer {
public:
  explicit HttpServer(std::shared_ptr<AnnotationService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port` (port 0 picks a free one) and serves on a background
  /// thread. Returns the bound port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until `stop`.
  void listen_blocking(const std::string& host, int port);
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds, loads models in the background (503 until done) and blocks.
void serve(const ServiceConfig& config);

}  // namespace snowclone
