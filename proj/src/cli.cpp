#include "compsplit/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "compsplit/analysis.hpp"
#include "compsplit/corpus.hpp"
#include "compsplit/grouping.hpp"
#include "compsplit/priors.hpp"
#include "compsplit/splitter.hpp"
#include "compsplit/synth.hpp"
#include "compsplit/textnorm.hpp"
#include "compsplit/util.hpp"

namespace compsplit {

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct NormOptions {
  std::string stopwords_path;
  std::string exceptions_path;
  std::string norm_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--stopwords", stopwords_path, "stopword list file (one word per line)");
    cmd->add_option("--lemma-exceptions", exceptions_path,
                    "lemma exception file (form<TAB>lemma per line)");
    cmd->add_option("--norm-dir", norm_dir,
                    "directory with stopwords.txt and lemma_exceptions.tsv "
                    "(default: $COMPSPLIT_NORM_DIR, else built-ins)");
  }

  NormConfig resolve() const {
    if (!stopwords_path.empty() || !exceptions_path.empty()) {
      if (stopwords_path.empty() || exceptions_path.empty()) {
        throw UsageError("--stopwords and --lemma-exceptions must be given together");
      }
      return NormConfig::from_files(stopwords_path, exceptions_path);
    }
    if (!norm_dir.empty()) return NormConfig::from_dir(norm_dir);
    if (const char* env = std::getenv("COMPSPLIT_NORM_DIR"); env && *env) {
      return NormConfig::from_dir(env);
    }
    return NormConfig::defaults();
  }
};

struct SideInput {
  std::vector<std::string> questions;
  std::vector<std::string> annotations;
  std::vector<std::string> jsonl;

  bool empty() const { return questions.empty() && annotations.empty() && jsonl.empty(); }
};

CorpusFormat parse_format(const std::string& fmt) {
  if (fmt == "vqa") return CorpusFormat::Vqa;
  if (fmt == "jsonl") return CorpusFormat::Jsonl;
  throw UsageError("unknown format '" + fmt + "' (vqa or jsonl)");
}

Corpus merge_corpora(std::vector<Corpus> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  Corpus merged;
  merged.source_label = "merged";
  for (Corpus& c : parts) {
    merged.records.insert(merged.records.end(), c.records.begin(), c.records.end());
  }
  std::sort(merged.records.begin(), merged.records.end(),
            [](const QaRecord& a, const QaRecord& b) { return a.question_id < b.question_id; });
  validate_corpus(merged);
  return merged;
}

Corpus load_side(CorpusFormat format, const SideInput& in, const std::string& side) {
  std::vector<Corpus> parts;
  if (format == CorpusFormat::Vqa) {
    if (in.questions.empty() || in.questions.size() != in.annotations.size()) {
      throw UsageError(side + ": vqa format needs matching --questions/--annotations pairs");
    }
    for (std::size_t i = 0; i < in.questions.size(); ++i) {
      parts.push_back(load_vqa(in.questions[i], in.annotations[i]));
    }
  } else {
    if (in.jsonl.empty()) throw UsageError(side + ": jsonl format needs at least one input file");
    for (const std::string& path : in.jsonl) parts.push_back(load_jsonl(path));
  }
  return merge_corpora(std::move(parts));
}

nlohmann::json input_hashes(CorpusFormat format, const SideInput& in) {
  nlohmann::json arr = nlohmann::json::array();
  auto add = [&arr](const std::string& path) {
    arr.push_back({{"path", path}, {"fnv1a", hash_file(path)}});
  };
  if (format == CorpusFormat::Vqa) {
    for (std::size_t i = 0; i < in.questions.size(); ++i) {
      add(in.questions[i]);
      add(in.annotations[i]);
    }
  } else {
    for (const std::string& path : in.jsonl) add(path);
  }
  return arr;
}

GroupOrder parse_order(const std::string& s) {
  if (s == "size_desc_then_key" || s == "size_desc") return GroupOrder::SizeDescThenKey;
  if (s == "key_lex") return GroupOrder::KeyLex;
  if (s == "input_order" || s == "input") return GroupOrder::InputOrder;
  if (s == "shuffled") return GroupOrder::Shuffled;
  throw UsageError("unknown group order '" + s + "'");
}

GainWeighting parse_weighting(const std::string& s) {
  if (s == "frequency") return GainWeighting::Frequency;
  if (s == "unique") return GainWeighting::Unique;
  throw UsageError("unknown weighting '" + s + "'");
}

GreedyEngine parse_engine(const std::string& s) {
  if (s == "heap") return GreedyEngine::Heap;
  if (s == "scan") return GreedyEngine::Scan;
  throw UsageError("unknown engine '" + s + "'");
}

struct SplitArgs {
  std::string format = "vqa";
  SideInput input;
  std::string fraction = "1/3";
  std::string order = "size_desc_then_key";
  std::string weighting = "frequency";
  std::string engine = "heap";
  bool random = false;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  std::string dump_groups_path;
  std::string dump_log_path;
  NormOptions norm;
};

int cmd_split(const SplitArgs& a) {
  const CorpusFormat format = parse_format(a.format);
  const Fraction fraction = Fraction::parse(a.fraction);
  const NormConfig norm = a.norm.resolve();
  const Corpus corpus = load_side(format, a.input, "split");

  const std::vector<QaGroup> groups = build_groups(corpus, norm, a.threads);
  if (!a.dump_groups_path.empty()) dump_groups_jsonl(groups, a.dump_groups_path);

  SplitOutput split;
  nlohmann::json echo{{"tool", "compsplit"},
                      {"version", kToolVersion},
                      {"command", "split"},
                      {"format", a.format},
                      {"fraction", fraction.str()},
                      {"seed", a.seed},
                      {"norm_digest", norm.resource_digest()},
                      {"inputs", input_hashes(format, a.input)}};
  if (a.random) {
    echo["mode"] = "random";
    split = random_split(corpus, fraction, a.seed);
    const std::vector<QaGroup> train_groups = build_groups(split.train, norm, a.threads);
    const std::vector<QaGroup> test_groups = build_groups(split.test, norm, a.threads);
    const CoverageReport cov = coverage(train_groups, test_groups);
    split.manifest.unique_coverage = cov.unique_coverage;
    split.manifest.weighted_coverage = cov.weighted_coverage;
  } else {
    echo["mode"] = "greedy";
    echo["order"] = a.order;
    echo["weighting"] = a.weighting;
    echo["engine"] = a.engine;
    SplitConfig cfg;
    cfg.target_test_fraction = fraction;
    cfg.group_order = parse_order(a.order);
    cfg.weighting = parse_weighting(a.weighting);
    cfg.engine = parse_engine(a.engine);
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    const SplitAssignment assignment = greedy_split(groups, cfg);
    if (!a.dump_log_path.empty()) dump_iteration_log_jsonl(assignment, groups, a.dump_log_path);
    split = materialize(assignment, groups, corpus);
    std::vector<QaGroup> train_groups;
    std::vector<QaGroup> test_groups;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      (assignment.side_by_group[g] == Side::Test ? test_groups : train_groups)
          .push_back(groups[g]);
    }
    const CoverageReport cov = coverage(train_groups, test_groups);
    split.manifest.unique_coverage = cov.unique_coverage;
    split.manifest.weighted_coverage = cov.weighted_coverage;
  }
  split.manifest.config_echo = echo;
  export_split(split, a.out_dir, format);

  std::cout << "split written to " << a.out_dir << "\n"
            << "  train: " << split.manifest.train.questions << " questions, "
            << split.manifest.train.images << " images, " << split.manifest.train.answers
            << " answers\n"
            << "  test:  " << split.manifest.test.questions << " questions, "
            << split.manifest.test.images << " images, " << split.manifest.test.answers
            << " answers\n";
  if (split.manifest.unique_coverage) {
    std::cout << "  coverage: unique=" << *split.manifest.unique_coverage
              << " weighted=" << *split.manifest.weighted_coverage << "\n";
  }
  std::cout << "  log digest: " << split.manifest.iteration_log_digest << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::string format = "vqa";
  SideInput train;
  SideInput test;
  std::string out_dir;
  int depth = 4;
  std::int64_t sample = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  NormOptions norm;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const CorpusFormat format = parse_format(a.format);
  const NormConfig norm = a.norm.resolve();
  const Corpus train = load_side(format, a.train, "train");
  const Corpus test = load_side(format, a.test, "test");

  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  if (ec) throw Error("cannot create directory " + a.out_dir + ": " + ec.message());

  const std::vector<QaGroup> train_groups = build_groups(train, norm, a.threads);
  const std::vector<QaGroup> test_groups = build_groups(test, norm, a.threads);

  const CoverageReport cov = coverage(train_groups, test_groups);
  write_text_file(a.out_dir + "/coverage.json", cov.to_json().dump(2) + "\n");

  const OverlapReport ov = overlap(train, test, norm, a.threads);
  write_text_file(a.out_dir + "/overlap.json", ov.to_json().dump(2) + "\n");

  std::optional<SampleSpec> sample;
  if (a.sample > 0) sample = SampleSpec{a.sample, a.seed};
  nlohmann::json trees{{"depth", a.depth},
                       {"train", prefix_tree_json(prefix_distribution(train, a.depth, sample))},
                       {"test", prefix_tree_json(prefix_distribution(test, a.depth, sample))}};
  write_text_file(a.out_dir + "/prefix_tree.json", trees.dump(2) + "\n");

  std::string csv = "side,question_type,answer,count\n";
  csv += answer_distribution_csv(answer_distribution(train, sample), "train");
  csv += answer_distribution_csv(answer_distribution(test, sample), "test");
  write_text_file(a.out_dir + "/answer_by_qtype.csv", csv);

  std::cout << "analysis written to " << a.out_dir << "\n"
            << "  unique_coverage: " << cov.unique_coverage << "\n"
            << "  weighted_coverage: " << cov.weighted_coverage << "\n"
            << "  question_string_overlap: " << ov.question_string_overlap << "\n"
            << "  reduced_qa_overlap: " << ov.reduced_qa_overlap << "\n"
            << "  raw_qa_overlap: " << ov.raw_qa_overlap << "\n"
            << "  shared_images: " << ov.shared_images << "\n";
  return 0;
}

struct EvalArgs {
  std::string format = "vqa";
  SideInput train;
  SideInput test;
  std::string keying = "both";
  std::string out_dir;
  std::string drop_a;
  std::string drop_b;
  int threads = 0;
  NormOptions norm;
};

int cmd_eval_prior(const EvalArgs& a) {
  if (!a.drop_a.empty() || !a.drop_b.empty()) {
    if (a.drop_a.empty() || a.drop_b.empty()) {
      throw UsageError("--drop-a and --drop-b must be given together");
    }
    std::error_code ec;
    std::filesystem::create_directories(a.out_dir, ec);
    if (ec) throw Error("cannot create directory " + a.out_dir + ": " + ec.message());
    nlohmann::json ja;
    nlohmann::json jb;
    try {
      ja = nlohmann::json::parse(read_text_file(a.drop_a));
      jb = nlohmann::json::parse(read_text_file(a.drop_b));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(std::string("eval report: ") + e.what());
    }
    const std::vector<DropEntry> drops =
        drop_report(EvalReport::from_json(ja), EvalReport::from_json(jb));
    write_text_file(a.out_dir + "/drop.csv", drop_report_csv(drops));
    std::cout << "drop report written to " << a.out_dir << "/drop.csv\n";
    for (std::size_t i = 0; i < drops.size() && i < 5; ++i) {
      std::cout << "  " << drops[i].question_type << ": drop " << drops[i].drop << "\n";
    }
    return 0;
  }

  if (a.train.empty() || a.test.empty()) {
    throw UsageError("eval-prior needs train and test inputs (or --drop-a/--drop-b)");
  }
  const CorpusFormat format = parse_format(a.format);
  const NormConfig norm = a.norm.resolve();
  const Corpus train = load_side(format, a.train, "train");
  const Corpus test = load_side(format, a.test, "test");

  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  if (ec) throw Error("cannot create directory " + a.out_dir + ": " + ec.message());

  std::vector<PriorKeying> keyings;
  if (a.keying == "both") {
    keyings = {PriorKeying::QuestionType, PriorKeying::ReducedForm};
  } else if (a.keying == "question-type" || a.keying == "question_type") {
    keyings = {PriorKeying::QuestionType};
  } else if (a.keying == "reduced-form" || a.keying == "reduced_form") {
    keyings = {PriorKeying::ReducedForm};
  } else {
    throw UsageError("unknown keying '" + a.keying + "'");
  }

  for (PriorKeying keying : keyings) {
    const PriorModel model = fit_prior(train, keying, norm);
    const EvalReport report = evaluate(model, test, norm, a.threads);
    const std::string base = a.out_dir + "/eval_" + to_string(keying);
    write_text_file(base + ".json", report.to_json().dump(2) + "\n");
    write_text_file(base + ".csv", report.to_csv());
    std::cout << "eval[" << to_string(keying) << "] overall accuracy "
              << report.overall.accuracy() << " over " << report.overall.n << " records\n";
  }
  return 0;
}

struct SynthArgs {
  std::string preset_name;
  std::string config_path;
  std::int64_t n_override = 0;
  std::int64_t seed_override = -1;
  std::string out_path;
};

int cmd_synth(const SynthArgs& a) {
  if (a.preset_name.empty() == a.config_path.empty()) {
    throw UsageError("synth needs exactly one of --preset or --config");
  }
  SynthConfig cfg;
  try {
    cfg = a.preset_name.empty() ? load_synth_config(a.config_path) : preset(a.preset_name);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    // bad config content is caller misuse at the CLI boundary
    throw UsageError(e.what());
  }
  if (a.n_override > 0) cfg.n_records = a.n_override;
  if (a.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed_override);
  const Corpus corpus = generate(cfg);
  write_jsonl(corpus, a.out_path);
  std::cout << "wrote " << corpus.size() << " records to " << a.out_path << "\n";
  return 0;
}

void attach_side(CLI::App* cmd, SideInput& side, const std::string& prefix) {
  cmd->add_option("--" + prefix + "questions", side.questions,
                  "VQA-style questions JSON (repeatable)");
  cmd->add_option("--" + prefix + "annotations", side.annotations,
                  "VQA-style annotations JSON (repeatable)");
  std::string jsonl_flag = prefix.empty() ? "--input" : "--" + prefix.substr(0, prefix.size() - 1);
  cmd->add_option(jsonl_flag, side.jsonl, "JSONL corpus (repeatable)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"compositional train/test splits of QA corpora, with audits and prior baselines"};
  app.require_subcommand(0, 1);

  SplitArgs split_args;
  CLI::App* split = app.add_subcommand(
      "split", "build a compositional (or random) train/test split");
  split->add_option("--format", split_args.format, "vqa | jsonl")->capture_default_str();
  attach_side(split, split_args.input, "");
  split->add_option("--fraction", split_args.fraction, "target test fraction (decimal or a/b)")
      ->capture_default_str();
  split->add_option("--order", split_args.order,
                    "size_desc_then_key | key_lex | input_order | shuffled")
      ->capture_default_str();
  split->add_option("--weighting", split_args.weighting, "frequency | unique")
      ->capture_default_str();
  split->add_option("--engine", split_args.engine, "heap | scan")->capture_default_str();
  split->add_flag("--random", split_args.random, "seeded random split instead of greedy");
  split->add_option("--seed", split_args.seed, "seed for shuffled order / random split")
      ->capture_default_str();
  split->add_option("--threads", split_args.threads, "worker threads (0 = auto)");
  split->add_option("--out", split_args.out_dir, "output directory")->required();
  split->add_option("--dump-groups", split_args.dump_groups_path, "write groups JSONL here");
  split->add_option("--dump-log", split_args.dump_log_path, "write iteration log JSONL here");
  split_args.norm.attach(split);

  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "coverage, overlap and distribution reports for a train/test pair");
  analyze->add_option("--format", analyze_args.format, "vqa | jsonl")->capture_default_str();
  attach_side(analyze, analyze_args.train, "train-");
  attach_side(analyze, analyze_args.test, "test-");
  analyze->add_option("--out", analyze_args.out_dir, "output directory")->required();
  analyze->add_option("--depth", analyze_args.depth, "prefix tree depth")->capture_default_str();
  analyze->add_option("--sample", analyze_args.sample,
                      "sample this many questions for the distribution reports");
  analyze->add_option("--seed", analyze_args.seed, "sampling seed")->capture_default_str();
  analyze->add_option("--threads", analyze_args.threads, "worker threads (0 = auto)");
  analyze_args.norm.attach(analyze);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval-prior", "fit language priors on train, score them on test");
  eval->add_option("--format", eval_args.format, "vqa | jsonl")->capture_default_str();
  attach_side(eval, eval_args.train, "train-");
  attach_side(eval, eval_args.test, "test-");
  eval->add_option("--keying", eval_args.keying, "question-type | reduced-form | both")
      ->capture_default_str();
  eval->add_option("--out", eval_args.out_dir, "output directory")->required();
  eval->add_option("--drop-a", eval_args.drop_a, "eval report JSON (baseline side)");
  eval->add_option("--drop-b", eval_args.drop_b, "eval report JSON (compositional side)");
  eval->add_option("--threads", eval_args.threads, "worker threads (0 = auto)");
  eval_args.norm.attach(eval);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic QA corpus");
  synth->add_option("--preset", synth_args.preset_name,
                    "color-bias | sport-bias | poisoned-type");
  synth->add_option("--config", synth_args.config_path, "SynthConfig .json or .toml file");
  synth->add_option("--n", synth_args.n_override, "override n_records");
  synth->add_option("--seed", synth_args.seed_override, "override seed");
  synth->add_option("--out", synth_args.out_path, "output JSONL file")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("compsplit");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (split->parsed()) return cmd_split(split_args);
    if (analyze->parsed()) return cmd_analyze(analyze_args);
    if (eval->parsed()) return cmd_eval_prior(eval_args);
    if (synth->parsed()) return cmd_synth(synth_args);
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace compsplit
