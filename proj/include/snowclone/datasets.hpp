#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snowclone/detector.hpp"
#include "snowclone/random.hpp"
#include "snowclone/tagger.hpp"

namespace snowclone {

class DatasetError : public std::runtime_error {
public:
  DatasetError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

struct LoadIssue {
  std::size_t line = 0;
  std::string message;
};

template <class T>
struct LoadResult {
  std::vector<T> items;
  std::vector<LoadIssue> rejected;  // one per dropped record
  std::vector<std::string> warnings;
};

/// NDJSON `{tokens:[string], tags:[0|1], group:string}`. Tokens are normalized
/// like tokenizer output; a token that normalizes to nothing is dropped along
/// with its tag. With `strict`, the first bad record throws DatasetError.
LoadResult<TaggedExample> read_pattern_dataset(std::istream& in, bool strict = false);
LoadResult<TaggedExample> load_pattern_dataset(const std::filesystem::path& path, bool strict = false);

/// NDJSON `{seed:[string], candidate:[string], label:0|1, seed_id:string}`.
LoadResult<ReferencePair> read_reference_dataset(std::istream& in, bool strict = false);
LoadResult<ReferencePair> load_reference_dataset(const std::filesystem::path& path, bool strict = false);

void write_pattern_dataset(std::ostream& out, std::span<const TaggedExample> items);
void write_reference_dataset(std::ostream& out, std::span<const ReferencePair> items);

// ---------------------------------------------------------------------------

struct SplitSpec {
  double train = 0.60;
  double dev = 0.20;
  double test = 0.20;
  std::uint64_t split_seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, dev, test;
};

/// Group-respecting split. Groups are shuffled by the split seed, then each
/// goes to whichever split is furthest below its target item count (ties go
/// to the earlier split: train, dev, test). Needs at least 3 groups.
SplitIndices group_split(std::span<const std::string> group_ids, const SplitSpec& spec);

template <class T>
struct Split {
  std::vector<T> train, dev, test;
};

Split<TaggedExample> group_split(std::span<const TaggedExample> items, const SplitSpec& spec);
Split<ReferencePair> group_split(std::span<const ReferencePair> items, const SplitSpec& spec);

// ---------------------------------------------------------------------------

struct SynthConfig {
  std::size_t n_patterns = 20;
  std::size_t instances_per_pattern = 50;
  std::size_t pairs_per_pattern = 50;
  std::size_t scaffold_vocab = 300;
  std::size_t slot_vocab = 200;
  std::size_t min_length = 5;
  std::size_t max_length = 10;
  std::size_t max_slots = 2;
  double negative_rate = 0.64;
  std::uint64_t rng_seed = 7;

  void validate() const;
};

/// A planted template: scaffold words with slot positions.
struct SynthPattern {
  std::string id;
  std::vector<std::string> scaffold;  // "" at slot positions
  TokenSeq seed;                      // the "original quote" instance
};

struct SynthData {
  std::vector<std::string> scaffold_words;
  std::vector<std::string> slot_words;
  std::vector<SynthPattern> patterns;
  std::vector<TaggedExample> tagged;
  std::vector<ReferencePair> pairs;

  /// Every sentence generated, one per entry; suitable for build_idf.
  std::vector<std::string> corpus() const;
};

/// Fills each slot of `p` with 1-2 slot words; gold tags mark exactly the
/// fillers.
TaggedExample instantiate(const SynthPattern& p, std::span<const std::string> slot_words, Rng& rng);

/// Synthetic stand-in for the released corpora.
///
/// Tagger examples are instances of random scaffold patterns with slot
/// fillers from a vocabulary disjoint from the scaffold words, so WILD is
/// decided by token identity. Detector pairs per pattern: the identity pair
/// and fresh instances as references; instances of other patterns and
/// shuffled copies of the seed as non-references, at `negative_rate`.
SynthData synth_generate(const SynthConfig& cfg);

}  // namespace snowclone
