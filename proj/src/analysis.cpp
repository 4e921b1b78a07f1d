#include "compsplit/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "compsplit/textnorm.hpp"
#include "compsplit/util.hpp"

namespace compsplit {

namespace {

std::vector<std::size_t> sampled_indices(std::size_t n, const std::optional<SampleSpec>& sample) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (!sample) return idx;
  if (sample->size < 0 || static_cast<std::size_t>(sample->size) > n) {
    throw Error("sample size " + std::to_string(sample->size) + " exceeds corpus size " +
                std::to_string(n));
  }
  std::mt19937_64 gen(sample->seed);
  fisher_yates(idx, gen);
  idx.resize(static_cast<std::size_t>(sample->size));
  return idx;
}

struct PrefixBuild {
  std::int64_t count = 0;
  std::map<std::string, PrefixBuild> children;
};

PrefixNode convert(const std::string& word, const PrefixBuild& b) {
  PrefixNode node;
  node.word = word;
  node.count = b.count;
  node.children.reserve(b.children.size());
  for (const auto& [w, child] : b.children) node.children.push_back(convert(w, child));
  std::sort(node.children.begin(), node.children.end(),
            [](const PrefixNode& a, const PrefixNode& b2) {
              if (a.count != b2.count) return a.count > b2.count;
              return a.word < b2.word;
            });
  return node;
}

std::string flat_qa_key(const std::string& question, const std::string& answer) {
  return question + '\x1f' + answer;
}

}  // namespace

nlohmann::json CoverageReport::to_json() const {
  nlohmann::json uncov = nlohmann::json::array();
  for (const auto& [name, count] : uncovered_concepts) {
    uncov.push_back({{"concept", name}, {"occurrences", count}});
  }
  return {{"unique_coverage", unique_coverage},
          {"weighted_coverage", weighted_coverage},
          {"uncovered_concepts", uncov}};
}

nlohmann::json OverlapReport::to_json() const {
  return {{"question_string_overlap", question_string_overlap},
          {"reduced_qa_overlap", reduced_qa_overlap},
          {"raw_qa_overlap", raw_qa_overlap},
          {"shared_images", shared_images}};
}

CoverageReport coverage(const std::vector<QaGroup>& train_groups,
                        const std::vector<QaGroup>& test_groups) {
  std::unordered_map<std::string, std::int64_t> test_weight;
  for (const QaGroup& g : test_groups) {
    for (const std::string& c : g.concepts) test_weight[c] += g.size();
  }
  std::unordered_set<std::string> train_concepts;
  for (const QaGroup& g : train_groups) {
    train_concepts.insert(g.concepts.begin(), g.concepts.end());
  }

  CoverageReport report;
  if (test_weight.empty()) return report;  // vacuous 1.0 / 1.0

  std::int64_t covered_unique = 0;
  std::int64_t covered_mass = 0;
  std::int64_t total_mass = 0;
  for (const auto& [name, w] : test_weight) {
    total_mass += w;
    if (train_concepts.count(name)) {
      ++covered_unique;
      covered_mass += w;
    } else {
      report.uncovered_concepts.emplace_back(name, w);
    }
  }
  report.unique_coverage =
      static_cast<double>(covered_unique) / static_cast<double>(test_weight.size());
  report.weighted_coverage =
      static_cast<double>(covered_mass) / static_cast<double>(total_mass);
  std::sort(report.uncovered_concepts.begin(), report.uncovered_concepts.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return report;
}

OverlapReport overlap(const Corpus& train, const Corpus& test, const NormConfig& cfg,
                      int threads) {
  OverlapReport report;
  if (test.records.empty()) return report;

  const std::vector<ReducedForm> train_reduced = reduce_corpus(train, cfg, threads);
  const std::vector<ReducedForm> test_reduced = reduce_corpus(test, cfg, threads);

  std::unordered_set<std::string> train_questions;
  std::unordered_set<std::string> train_raw_qa;
  std::unordered_set<std::string> train_reduced_qa;
  std::unordered_set<std::int64_t> train_images;
  for (std::size_t i = 0; i < train.records.size(); ++i) {
    const QaRecord& r = train.records[i];
    train_questions.insert(r.question_text);
    train_raw_qa.insert(flat_qa_key(r.question_text, r.ground_truth_answer));
    train_reduced_qa.insert(flat_qa_key(train_reduced[i].joined(), r.ground_truth_answer));
    train_images.insert(r.image_id);
  }

  std::int64_t q_hits = 0;
  std::int64_t raw_hits = 0;
  std::int64_t reduced_hits = 0;
  std::unordered_set<std::int64_t> shared_images;
  for (std::size_t i = 0; i < test.records.size(); ++i) {
    const QaRecord& r = test.records[i];
    if (train_questions.count(r.question_text)) ++q_hits;
    if (train_raw_qa.count(flat_qa_key(r.question_text, r.ground_truth_answer))) ++raw_hits;
    if (train_reduced_qa.count(flat_qa_key(test_reduced[i].joined(), r.ground_truth_answer))) {
      ++reduced_hits;
    }
    if (train_images.count(r.image_id)) shared_images.insert(r.image_id);
  }
  const double n = static_cast<double>(test.records.size());
  report.question_string_overlap = static_cast<double>(q_hits) / n;
  report.raw_qa_overlap = static_cast<double>(raw_hits) / n;
  report.reduced_qa_overlap = static_cast<double>(reduced_hits) / n;
  report.shared_images = static_cast<std::int64_t>(shared_images.size());
  return report;
}

PrefixNode prefix_distribution(const Corpus& corpus, int depth,
                               const std::optional<SampleSpec>& sample) {
  if (depth < 1) throw UsageError("prefix depth must be >= 1");
  PrefixBuild root;
  for (std::size_t i : sampled_indices(corpus.records.size(), sample)) {
    const std::vector<std::string> toks = tokenize(corpus.records[i].question_text);
    ++root.count;
    PrefixBuild* node = &root;
    const std::size_t limit = std::min<std::size_t>(toks.size(), static_cast<std::size_t>(depth));
    for (std::size_t d = 0; d < limit; ++d) {
      node = &node->children[toks[d]];
      ++node->count;
    }
  }
  return convert("", root);
}

nlohmann::json prefix_tree_json(const PrefixNode& node) {
  nlohmann::json children = nlohmann::json::array();
  for (const PrefixNode& c : node.children) children.push_back(prefix_tree_json(c));
  nlohmann::json j{{"count", node.count}, {"children", children}};
  if (!node.word.empty()) j["word"] = node.word;
  return j;
}

AnswerDistribution answer_distribution(const Corpus& corpus,
                                       const std::optional<SampleSpec>& sample,
                                       const std::vector<std::string>& prefix_list) {
  std::map<std::string, std::unordered_map<std::string, std::int64_t>> counts;
  for (std::size_t i : sampled_indices(corpus.records.size(), sample)) {
    const QaRecord& r = corpus.records[i];
    const std::string qtype = r.question_type.empty()
                                  ? derive_question_type(r.question_text, prefix_list)
                                  : r.question_type;
    ++counts[qtype][r.ground_truth_answer];
  }
  AnswerDistribution dist;
  for (auto& [qtype, answers] : counts) {
    auto& ordered = dist[qtype];
    ordered.assign(answers.begin(), answers.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
  }
  return dist;
}

std::string answer_distribution_csv(const AnswerDistribution& dist,
                                    const std::string& side_label) {
  std::string out;
  for (const auto& [qtype, answers] : dist) {
    for (const auto& [answer, count] : answers) {
      out += csv_escape(side_label);
      out += ',';
      out += csv_escape(qtype);
      out += ',';
      out += csv_escape(answer);
      out += ',';
      out += std::to_string(count);
      out += '\n';
    }
  }
  return out;
}

std::string derive_question_type(const std::string& question,
                                 const std::vector<std::string>& prefix_list) {
  const std::string q = to_lower(trim(question));
  const std::string* best = nullptr;
  for (const std::string& p : prefix_list) {
    if (p.empty() || q.size() < p.size()) continue;
    if (q.compare(0, p.size(), p) != 0) continue;
    // the prefix must end at a word boundary
    if (q.size() > p.size() && std::isalnum(static_cast<unsigned char>(q[p.size()]))) continue;
    if (!best || p.size() > best->size()) best = &p;
  }
  return best ? *best : "other";
}

const std::vector<std::string>& default_question_type_prefixes() {
  static const std::vector<std::string> kPrefixes = {
      "what is this", "what is the man", "what is the woman", "what is the person",
      "what is the name", "what is the color of the", "what is in the", "what is on the",
      "what is the", "what is", "what are the", "what are", "what kind of", "what type of",
      "what color is the", "what color are the", "what color is", "what color", "what brand",
      "what sport is", "what sport", "what animal is", "what animal", "what room is",
      "what room", "what time", "what number is", "what number", "what does the", "what do",
      "what", "is there a", "is there", "is this a", "is this an", "is this", "is the",
      "is it", "is that a", "is he", "is she", "are there any", "are there", "are the",
      "are these", "are they", "are", "how many people are in", "how many people are",
      "how many", "how", "does the", "does this", "do you", "do", "can you", "could",
      "has", "where is the", "where are the", "where", "which", "who is", "who",
      "why is the", "why", "was"};
  return kPrefixes;
}

}  // namespace compsplit
