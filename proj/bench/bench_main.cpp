// Compares the serial reference kernels against the OpenMP kernels and the
// two greedy engines on synthetic corpora. Usage: compsplit_bench [n_records]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "compsplit/analysis.hpp"
#include "compsplit/grouping.hpp"
#include "compsplit/priors.hpp"
#include "compsplit/splitter.hpp"
#include "compsplit/synth.hpp"
#include "compsplit/textnorm.hpp"

using namespace compsplit;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename F>
double timed(const char* label, F&& fn) {
  auto start = std::chrono::steady_clock::now();
  fn();
  double s = seconds_since(start);
  std::printf("  %-28s %8.3f s\n", label, s);
  return s;
}

// A corpus with a wide group spectrum so the splitter has real work to do.
SynthConfig bench_config(std::int64_t n) {
  SynthConfig cfg = preset("sport-bias");
  cfg.label = "bench";
  cfg.n_records = n;
  cfg.templates.push_back({"What is the {thing} made of?", "what is the", 0.6, ""});
  cfg.templates.push_back({"Where is the {thing}?", "where is the", 0.5, ""});
  cfg.templates.push_back({"How many {thing}s are on the table?", "how many", 0.5, ""});
  std::vector<std::string> things;
  std::vector<std::string> materials;
  for (int i = 0; i < 400; ++i) things.push_back("object" + std::to_string(i));
  for (int i = 0; i < 40; ++i) materials.push_back("material" + std::to_string(i));
  cfg.vocab["thing"] = things;
  AnswerDist material_dist;
  for (std::size_t i = 0; i < materials.size(); ++i) {
    material_dist.entries.emplace_back(materials[i], 1.0 / static_cast<double>(materials.size()));
  }
  cfg.default_answers = material_dist;
  for (SynthTemplate& t : cfg.templates) {
    std::size_t open = t.text.find('{');
    t.slot = open == std::string::npos
                 ? ""
                 : t.text.substr(open + 1, t.text.find('}') - open - 1);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t n = argc > 1 ? std::atoll(argv[1]) : 100000;
#ifdef _OPENMP
  std::printf("OpenMP: %d threads available\n", omp_get_max_threads());
#else
  std::printf("OpenMP: not enabled (serial build)\n");
#endif
  std::printf("generating %lld records...\n", static_cast<long long>(n));

  const SynthConfig cfg = bench_config(n);
  Corpus corpus;
  timed("synth generate", [&] { corpus = generate(cfg); });
  const NormConfig norm = NormConfig::defaults();

  std::printf("reduction kernel:\n");
  std::vector<ReducedForm> serial_forms;
  std::vector<ReducedForm> omp_forms;
  double t_serial = timed("reduce_corpus_serial", [&] {
    serial_forms = reduce_corpus_serial(corpus, norm);
  });
  double t_omp = timed("reduce_corpus (OpenMP)", [&] {
    omp_forms = reduce_corpus(corpus, norm, 0);
  });
  std::printf("  match: %s, speedup %.2fx\n",
              serial_forms == omp_forms ? "yes" : "NO (BUG)",
              t_omp > 0 ? t_serial / t_omp : 0.0);

  std::vector<QaGroup> groups;
  timed("build_groups", [&] { groups = build_groups(corpus, norm, 0); });
  std::printf("  %zu groups\n", groups.size());

  std::printf("greedy splitter:\n");
  SplitConfig heap_cfg;
  heap_cfg.engine = GreedyEngine::Heap;
  SplitConfig scan_serial_cfg;
  scan_serial_cfg.engine = GreedyEngine::Scan;
  scan_serial_cfg.threads = 1;
  SplitConfig scan_omp_cfg;
  scan_omp_cfg.engine = GreedyEngine::Scan;
  scan_omp_cfg.threads = 0;

  SplitAssignment heap_out;
  timed("greedy (heap engine)", [&] { heap_out = greedy_split(groups, heap_cfg); });
  if (groups.size() <= 200000) {
    SplitAssignment scan_serial_out;
    SplitAssignment scan_omp_out;
    double t_scan = timed("greedy (scan, serial)", [&] {
      scan_serial_out = greedy_split(groups, scan_serial_cfg);
    });
    double t_scan_omp = timed("greedy (scan, OpenMP)", [&] {
      scan_omp_out = greedy_split(groups, scan_omp_cfg);
    });
    bool same = heap_out.side_by_group == scan_serial_out.side_by_group &&
                heap_out.side_by_group == scan_omp_out.side_by_group;
    std::printf("  engines agree: %s, scan speedup %.2fx\n", same ? "yes" : "NO (BUG)",
                t_scan_omp > 0 ? t_scan / t_scan_omp : 0.0);
  }

  SplitOutput split;
  timed("materialize", [&] { split = materialize(heap_out, groups, corpus); });

  std::printf("prior evaluation kernel:\n");
  PriorModel model;
  timed("fit_prior", [&] { model = fit_prior(split.train, PriorKeying::QuestionType, norm); });
  EvalReport serial_report;
  EvalReport omp_report;
  double e_serial = timed("evaluate_serial", [&] {
    serial_report = evaluate_serial(model, split.test, norm);
  });
  double e_omp = timed("evaluate (OpenMP)", [&] {
    omp_report = evaluate(model, split.test, norm, 0);
  });
  std::printf("  match: %s, speedup %.2fx\n",
              serial_report.overall.score_numerator == omp_report.overall.score_numerator &&
                      serial_report.overall.n == omp_report.overall.n
                  ? "yes"
                  : "NO (BUG)",
              e_omp > 0 ? e_serial / e_omp : 0.0);
  std::printf("done.\n");
  return 0;
}
