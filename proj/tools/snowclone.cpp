#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "snowclone/datasets.hpp"
#include "snowclone/detector.hpp"
#include "snowclone/service.hpp"
#include "snowclone/tagger.hpp"

namespace fs = std::filesystem;
using namespace snowclone;

namespace {

struct Common {
  std::string config_path;
  std::string seed_file;
  std::string model_dir;
  std::uint64_t split_seed = 0;
  std::uint64_t rng_seed = 1;

  ServiceConfig config() const {
    ServiceConfig c = config_path.empty() ? ServiceConfig{} : ServiceConfig::load(config_path);
    if (!seed_file.empty()) c.seed_file = seed_file;
    if (!model_dir.empty()) c.model_dir = model_dir;
    return c;
  }
  fs::path models() const { return config().model_dir; }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
  return in;
}

template <class T>
std::vector<T> report_load(LoadResult<T> r, const std::string& what) {
  for (const auto& w : r.warnings) std::cerr << what << ": " << w << '\n';
  for (std::size_t i = 0; i < r.rejected.size() && i < 5; ++i)
    std::cerr << what << ": line " << r.rejected[i].line << ": " << r.rejected[i].message << '\n';
  if (r.items.empty()) throw std::runtime_error(what + " has no usable records");
  return std::move(r.items);
}

template <class T>
std::vector<T> portion(const Split<T>& s, const std::string& which, std::span<const T> all) {
  if (which == "train") return s.train;
  if (which == "dev") return s.dev;
  if (which == "test") return s.test;
  return {all.begin(), all.end()};
}

std::shared_ptr<const IdfTable> load_idf(const fs::path& dir) {
  auto in = open_in(dir / model_files::kIdf);
  return std::make_shared<const IdfTable>(IdfTable::load(in));
}

TaggerModel load_tagger(const fs::path& dir, std::shared_ptr<const IdfTable> idf) {
  auto in = open_in(dir / model_files::kTagger);
  return TaggerModel::load(in, std::move(idf));
}

DetectorModel load_detector(const fs::path& dir) {
  auto in = open_in(dir / model_files::kDetector);
  return DetectorModel::load(in);
}

void print(const char* label, const TagMetrics& m) {
  std::printf("%-8s accuracy=%.4f wild_recall=%.4f wild_precision=%.4f tokens=%zu\n", label, m.accuracy, m.wild_recall,
              m.wild_precision, m.tokens);
}

void print(const char* label, const BinaryMetrics& m) {
  std::printf("%-8s accuracy=%.4f precision=%.4f recall=%.4f pairs=%zu\n", label, m.accuracy, m.precision, m.recall,
              m.total);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Snowclone pattern learning and reference detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Service config file (key=value)")->check(CLI::ExistingFile);
    sub->add_option("--seed-file", common.seed_file, "Seed quotes (NDJSON)");
    sub->add_option("--model-dir", common.model_dir, "Directory holding tagger.model, idf.tsv, detector.model");
    sub->add_option("--split-seed", common.split_seed, "Seed for the group split");
    sub->add_option("--rng-seed", common.rng_seed, "Seed for generation or training order");
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  add_common(synth);
  SynthConfig scfg;
  std::string synth_out = "data/synth";
  synth->add_option("--out-dir", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--patterns", scfg.n_patterns)->capture_default_str();
  synth->add_option("--instances", scfg.instances_per_pattern)->capture_default_str();
  synth->add_option("--pairs", scfg.pairs_per_pattern)->capture_default_str();
  synth->add_option("--negative-rate", scfg.negative_rate)->capture_default_str();
  synth->callback([&] {
    scfg.rng_seed = common.rng_seed;
    const SynthData d = synth_generate(scfg);
    const fs::path dir = synth_out;
    auto p = open_out(dir / "patterns.ndjson");
    write_pattern_dataset(p, d.tagged);
    auto r = open_out(dir / "references.ndjson");
    write_reference_dataset(r, d.pairs);
    std::vector<SeedEntry> seeds;
    for (const auto& pat : d.patterns) seeds.push_back({pat.id, pat.seed, "synthetic " + pat.id, ""});
    auto s = open_out(dir / "seeds.ndjson");
    write_seed_file(s, seeds);
    auto c = open_out(dir / "corpus.txt");
    for (const auto& line : d.corpus()) c << line << '\n';
    std::printf("wrote %zu tagged examples, %zu pairs, %zu seeds to %s\n", d.tagged.size(), d.pairs.size(), seeds.size(),
                dir.string().c_str());
  });

  // split
  auto* split = app.add_subcommand("split", "Group-respecting 60/20/20 split of a dataset");
  add_common(split);
  std::string split_in, split_out = ".", split_kind = "pattern";
  split->add_option("input", split_in, "NDJSON dataset")->required()->check(CLI::ExistingFile);
  split->add_option("--kind", split_kind, "pattern or reference")->check(CLI::IsMember({"pattern", "reference"}));
  split->add_option("--out-dir", split_out)->capture_default_str();
  split->callback([&] {
    const SplitSpec spec{.split_seed = common.split_seed};
    const fs::path dir = split_out, stem = fs::path(split_in).stem();
    auto write = [&](const char* part, auto&& items, auto&& writer) {
      auto out = open_out(dir / (stem.string() + "." + part + ".ndjson"));
      writer(out, std::span(items));
      std::printf("%-5s %zu\n", part, items.size());
    };
    if (split_kind == "pattern") {
      const auto items = report_load(load_pattern_dataset(split_in), split_in);
      const auto s = group_split(std::span<const TaggedExample>(items), spec);
      for (auto [name, part] : {std::pair{"train", &s.train}, {"dev", &s.dev}, {"test", &s.test}})
        write(name, *part, [](std::ostream& o, std::span<const TaggedExample> v) { write_pattern_dataset(o, v); });
    } else {
      const auto items = report_load(load_reference_dataset(split_in), split_in);
      const auto s = group_split(std::span<const ReferencePair>(items), spec);
      for (auto [name, part] : {std::pair{"train", &s.train}, {"dev", &s.dev}, {"test", &s.test}})
        write(name, *part, [](std::ostream& o, std::span<const ReferencePair> v) { write_reference_dataset(o, v); });
    }
  });

  // train-tagger
  auto* ttag = app.add_subcommand("train-tagger", "Train the wildcard tagger");
  add_common(ttag);
  std::string tag_data, tag_corpus, tag_features = FeatureConfig{}.str();
  std::size_t tag_epochs = 10;
  bool tag_no_tune = false;
  ttag->add_option("data", tag_data, "Pattern dataset (NDJSON)")->required()->check(CLI::ExistingFile);
  ttag->add_option("--corpus", tag_corpus, "Plain-text corpus for idf (default: every sentence of the dataset, labels unused)")
      ->check(CLI::ExistingFile);
  ttag->add_option("--epochs", tag_epochs)->capture_default_str();
  ttag->add_option("--features", tag_features, "Comma-separated feature families, or 'none'")->capture_default_str();
  ttag->add_flag("--no-tune", tag_no_tune, "Skip tuning the WILD bias on the dev split");
  ttag->callback([&] {
    const auto items = report_load(load_pattern_dataset(tag_data), tag_data);
    const auto s = group_split(std::span<const TaggedExample>(items), {.split_seed = common.split_seed});
    std::shared_ptr<const IdfTable> idf;
    if (!tag_corpus.empty()) {
      auto in = open_in(tag_corpus);
      idf = std::make_shared<const IdfTable>(build_idf(in));
    } else {
      std::vector<TokenSeq> docs;
      for (const auto& ex : items) docs.push_back(ex.sentence);
      idf = std::make_shared<const IdfTable>(build_idf(std::span<const TokenSeq>(docs)));
    }
    TaggerModel m = train_tagger(s.train, tag_epochs, common.rng_seed,
                                 {.config = FeatureConfig::parse(tag_features), .idf = idf});
    if (!tag_no_tune) {
      std::vector<double> grid;
      for (int i = -10; i <= 20; ++i) grid.push_back(0.25 * i);
      const double b = tune_wild_bias(m, s.dev, grid);
      m = m.with_wild_bias(b);
      std::printf("wild bias %.2f (tuned on %zu dev sentences)\n", b, s.dev.size());
    }
    const fs::path dir = common.models();
    auto mo = open_out(dir / model_files::kTagger);
    m.save(mo);
    auto io = open_out(dir / model_files::kIdf);
    idf->save(io);
    std::printf("train/dev/test sentences: %zu/%zu/%zu\n", s.train.size(), s.dev.size(), s.test.size());
    print("naive", naive_baseline(s.test));
    print("tagger", eval_tagger(m, s.test));
    std::printf("saved %s and %s\n", (dir / model_files::kTagger).string().c_str(), (dir / model_files::kIdf).string().c_str());
  });

  // eval-tagger
  auto* etag = app.add_subcommand("eval-tagger", "Evaluate a saved tagger");
  add_common(etag);
  std::string etag_data, etag_portion = "test";
  etag->add_option("data", etag_data, "Pattern dataset (NDJSON)")->required()->check(CLI::ExistingFile);
  etag->add_option("--portion", etag_portion, "all, train, dev or test portion of the group split")
      ->check(CLI::IsMember({"all", "train", "dev", "test"}))
      ->capture_default_str();
  etag->callback([&] {
    const auto items = report_load(load_pattern_dataset(etag_data), etag_data);
    const auto s = group_split(std::span<const TaggedExample>(items), {.split_seed = common.split_seed});
    const auto test = portion(s, etag_portion, std::span<const TaggedExample>(items));
    const fs::path dir = common.models();
    const TaggerModel m = load_tagger(dir, load_idf(dir));
    print("naive", naive_baseline(test));
    print("tagger", eval_tagger(m, test));
  });

  // train-detector
  auto* tdet = app.add_subcommand("train-detector", "Train the reference detector (needs a trained tagger)");
  add_common(tdet);
  std::string det_data;
  DetectorTrainOptions dopt;
  tdet->add_option("data", det_data, "Reference dataset (NDJSON)")->required()->check(CLI::ExistingFile);
  tdet->add_option("--epochs", dopt.epochs)->capture_default_str();
  tdet->add_option("--C", dopt.reg_C, "SVM regularization constant")->capture_default_str();
  tdet->callback([&] {
    const auto items = report_load(load_reference_dataset(det_data), det_data);
    const auto s = group_split(std::span<const ReferencePair>(items), {.split_seed = common.split_seed});
    const fs::path dir = common.models();
    const auto idf = load_idf(dir);
    const TaggerModel tagger = load_tagger(dir, idf);
    std::vector<ReferencePair> train = s.train;
    train.insert(train.end(), s.dev.begin(), s.dev.end());
    DetectorTrainReport report;
    const DetectorModel d = train_detector(train, tagger, *idf, common.rng_seed, dopt, &report);
    auto out = open_out(dir / model_files::kDetector);
    d.save(out);
    std::printf("train pairs %zu, objective %.6f -> %.6f, train accuracy %.4f\n", train.size(), report.objective.front(),
                report.objective.back(), report.train_accuracy);
    print("naive", majority_baseline(s.test));
    print("detector", eval_detector(d, s.test, tagger, *idf));
    std::printf("saved %s\n", (dir / model_files::kDetector).string().c_str());
  });

  // eval-detector
  auto* edet = app.add_subcommand("eval-detector", "Evaluate the detector; --splits N cross-validates");
  add_common(edet);
  std::string edet_data, edet_portion = "test";
  std::size_t edet_splits = 0;
  DetectorTrainOptions eopt;
  edet->add_option("data", edet_data, "Reference dataset (NDJSON)")->required()->check(CLI::ExistingFile);
  edet->add_option("--splits", edet_splits, "Retrain and test on N group splits and report mean ± std");
  edet->add_option("--portion", edet_portion, "Portion scored by the saved model when --splits is not given")
      ->check(CLI::IsMember({"all", "train", "dev", "test"}))
      ->capture_default_str();
  edet->add_option("--epochs", eopt.epochs)->capture_default_str();
  edet->callback([&] {
    const auto items = report_load(load_reference_dataset(edet_data), edet_data);
    const fs::path dir = common.models();
    const auto idf = load_idf(dir);
    const TaggerModel tagger = load_tagger(dir, idf);
    if (edet_splits > 0) {
      const auto r = cross_validate_detector(items, tagger, *idf, edet_splits, common.split_seed, common.rng_seed, eopt);
      for (std::size_t i = 0; i < r.per_split.size(); ++i) {
        const std::string label = "split" + std::to_string(i);
        print(label.c_str(), r.per_split[i]);
      }
      std::printf("mean     accuracy=%.4f±%.4f precision=%.4f±%.4f recall=%.4f±%.4f over %zu splits\n", r.accuracy.mean,
                  r.accuracy.stddev, r.precision.mean, r.precision.stddev, r.recall.mean, r.recall.stddev, edet_splits);
      return;
    }
    const auto s = group_split(std::span<const ReferencePair>(items), {.split_seed = common.split_seed});
    const auto test = portion(s, edet_portion, std::span<const ReferencePair>(items));
    print("naive", majority_baseline(test));
    print("detector", eval_detector(load_detector(dir), test, tagger, *idf));
  });

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "Annotate references in a text file ('-' reads stdin)");
  add_common(scan_cmd);
  std::string scan_file;
  scan_cmd->add_option("file", scan_file, "Text file")->required();
  scan_cmd->callback([&] {
    std::stringstream buf;
    if (scan_file == "-") {
      buf << std::cin.rdbuf();
    } else {
      auto in = open_in(scan_file);
      buf << in.rdbuf();
    }
    const std::string text = buf.str();
    const auto engine = ScanEngine::from_config(common.config());
    for (const auto& a : engine->scan(text)) {
      nlohmann::json j{{"char_start", a.char_start}, {"char_end", a.char_end}, {"seed_id", a.seed_id},
                       {"exact", a.exact()},         {"matched_text", a.matched_text}};
      if (!a.exact()) j["score"] = a.score;
      std::cout << j.dump() << '\n';
    }
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation HTTP service");
  add_common(serve_cmd);
  int port = -1;
  std::string host;
  serve_cmd->add_option("--port", port, "Override the configured port");
  serve_cmd->add_option("--host", host, "Override the configured host");
  serve_cmd->callback([&] {
    ServiceConfig c = common.config();
    if (port >= 0) c.port = port;
    if (!host.empty()) c.host = host;
    serve(c);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
