// Serial vs OpenMP kernels on synthetic data.
//
//   snowclone_bench [--patterns N] [--repeat R]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "snowclone/datasets.hpp"
#include "snowclone/kernels.hpp"

using namespace snowclone;

namespace {

template <class F>
double best_ms(int repeat, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-14s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark the serial and parallel kernels"};
  SynthConfig cfg;
  cfg.n_patterns = 60;
  cfg.pairs_per_pattern = 100;
  int repeat = 3;
  app.add_option("--patterns", cfg.n_patterns)->capture_default_str();
  app.add_option("--repeat", repeat)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const SynthData d = synth_generate(cfg);
  const IdfTable idf = build_idf(std::span<const std::string>(d.corpus()));
  const TaggerModel tagger = train_tagger(d.tagged, 5, 1);
  std::printf("threads %d, pairs %zu, sentences %zu\n", kernels::thread_count(), d.pairs.size(), d.tagged.size());

  bool ok = true;
  std::vector<DetectorFeatures> fs, fp;
  const double a = best_ms(repeat, [&] { fs = kernels::pair_features_serial(d.pairs, tagger, idf); });
  const double b = best_ms(repeat, [&] { fp = kernels::pair_features_parallel(d.pairs, tagger, idf); });
  bool same = fs.size() == fp.size();
  for (std::size_t i = 0; same && i < fs.size(); ++i) same = fs[i].values() == fp[i].values();
  row("pair_features", a, b, same);
  ok &= same;

  std::vector<TokenSeq> sentences;
  for (const auto& ex : d.tagged) sentences.push_back(ex.sentence);
  std::vector<MinHashSignature> ss, sp;
  const double c = best_ms(repeat, [&] { ss = kernels::signatures_serial(sentences, 128, 1); });
  const double e = best_ms(repeat, [&] { sp = kernels::signatures_parallel(sentences, 128, 1); });
  row("signatures", c, e, ss == sp);
  ok &= ss == sp;

  std::vector<Label> labels;
  for (const auto& p : d.pairs) labels.push_back(p.label);
  DetectorTrainOptions opt;
  opt.epochs = 10;
  const DetectorModel m = train_detector_on_features(fs, labels, 1, opt);
  std::vector<double> rs, rp;
  const double g = best_ms(repeat, [&] { rs = kernels::scores_serial(m, fs); });
  const double h = best_ms(repeat, [&] { rp = kernels::scores_parallel(m, fs); });
  row("scores", g, h, rs == rp);
  ok &= rs == rp;
  return ok ? 0 : 1;
}
