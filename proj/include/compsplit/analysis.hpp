#ifndef COMPSPLIT_ANALYSIS_HPP
#define COMPSPLIT_ANALYSIS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "compsplit/corpus.hpp"
#include "compsplit/grouping.hpp"

namespace compsplit {

struct CoverageReport {
  // Fraction of distinct test-side concepts present on the train side.
  double unique_coverage = 1.0;
  // Fraction of test-side concept occurrences covered, each concept
  // weighted by the total member count of the test groups containing it.
  double weighted_coverage = 1.0;
  // Uncovered concepts with occurrence counts; count desc, name asc.
  std::vector<std::pair<std::string, std::int64_t>> uncovered_concepts;

  nlohmann::json to_json() const;
};

struct OverlapReport {
  // All fractions are record-weighted over the test side: the share of
  // test records whose string/key/pair also occurs anywhere in train.
  // Empty test side yields 0.0 for each.
  double question_string_overlap = 0.0;
  double reduced_qa_overlap = 0.0;  // 0 for every greedy_split output
  double raw_qa_overlap = 0.0;
  std::int64_t shared_images = 0;

  nlohmann::json to_json() const;
};

struct PrefixNode {
  std::string word;  // empty at the root
  std::int64_t count = 0;
  std::vector<PrefixNode> children;  // count desc, word asc
};

struct SampleSpec {
  std::int64_t size = 0;
  std::uint64_t seed = 0;
};

// Both fractions computed on group lists produced with one NormConfig.
// Empty test side is vacuously fully covered (1.0, 1.0).
CoverageReport coverage(const std::vector<QaGroup>& train_groups,
                        const std::vector<QaGroup>& test_groups);

OverlapReport overlap(const Corpus& train, const Corpus& test, const NormConfig& cfg,
                      int threads = 0);

// Counts of question first-k words (raw tokenization, stopwords retained,
// as in the sunburst figures). Optional seeded sampling without
// replacement; sample size larger than the corpus is an error.
PrefixNode prefix_distribution(const Corpus& corpus, int depth = 4,
                               const std::optional<SampleSpec>& sample = std::nullopt);

// Nested {word, count, children} form for external sunburst tools.
nlohmann::json prefix_tree_json(const PrefixNode& node);

const std::vector<std::string>& default_question_type_prefixes();

using AnswerDistribution =
    std::map<std::string, std::vector<std::pair<std::string, std::int64_t>>>;

// Per question type, answers with counts in descending count order (ties
// lexicographic). Records without a question_type are classified with
// prefix_list via derive_question_type.
AnswerDistribution answer_distribution(
    const Corpus& corpus, const std::optional<SampleSpec>& sample = std::nullopt,
    const std::vector<std::string>& prefix_list = default_question_type_prefixes());

std::string answer_distribution_csv(const AnswerDistribution& dist,
                                    const std::string& side_label);

// Longest matching prefix wins; the match must end at a word boundary;
// no match -> "other".
std::string derive_question_type(const std::string& question,
                                 const std::vector<std::string>& prefix_list);

}  // namespace compsplit

#endif
