#ifndef COMPSPLIT_PRIORS_HPP
#define COMPSPLIT_PRIORS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "compsplit/analysis.hpp"
#include "compsplit/corpus.hpp"
#include "compsplit/textnorm.hpp"

namespace compsplit {

enum class PriorKeying { QuestionType, ReducedForm };

const char* to_string(PriorKeying keying);

// Per-key majority-answer predictor: the mechanism behind "answers driven
// by superficial correlations", isolated from any visual input.
struct PriorModel {
  PriorKeying keying = PriorKeying::QuestionType;
  // key -> (most frequent train answer, its train count); ties lexicographic
  std::unordered_map<std::string, std::pair<std::string, std::int64_t>> table;
  std::string fallback_answer;  // global majority, used for unseen keys

  const std::string& predict(const std::string& key) const {
    auto it = table.find(key);
    return it == table.end() ? fallback_answer : it->second.first;
  }
};

// Accuracy bucket with exact integer accounting: per-record score is
// min(matches,3)/3, so accuracy = score_numerator / (3*n). Integer sums
// make aggregation independent of record and thread order.
struct EvalBucket {
  std::int64_t score_numerator = 0;
  std::int64_t n = 0;

  double accuracy() const {
    return n == 0 ? 0.0 : static_cast<double>(score_numerator) / (3.0 * static_cast<double>(n));
  }
};

struct QtypeAccuracy {
  std::string question_type;
  double accuracy = 0.0;
  std::int64_t n = 0;
};

struct EvalReport {
  PriorKeying keying = PriorKeying::QuestionType;
  EvalBucket overall;
  std::map<std::string, EvalBucket> by_answer_type;  // yes/no, number, other
  std::vector<QtypeAccuracy> by_question_type;       // n desc, type asc

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string to_csv() const;
};

struct DropEntry {
  std::string question_type;
  double accuracy_a = 0.0;  // typically the random-split report
  double accuracy_b = 0.0;  // typically the compositional report
  double drop = 0.0;        // accuracy_a - accuracy_b
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
};

// Per key, predicted answer = argmax train frequency of the ground-truth
// answer (ties lexicographic); fallback = global argmax. Throws on an
// empty train corpus.
PriorModel fit_prior(const Corpus& train, PriorKeying keying, const NormConfig& cfg);

// Standard consensus scoring: min(matches/3, 1) over the human answers;
// exact match against the ground truth when no human answers exist.
double vqa_accuracy(const std::string& predicted, const std::vector<std::string>& human_answers,
                    const std::string& ground_truth = "");

// Integer numerator (0..3) of the same score; 3 = full credit.
int vqa_accuracy_numerator(const std::string& predicted,
                           const std::vector<std::string>& human_answers,
                           const std::string& ground_truth);

// Scores every test record (OpenMP over records; aggregation is exact and
// order-independent). evaluate_serial is the reference loop.
EvalReport evaluate(const PriorModel& model, const Corpus& test, const NormConfig& cfg,
                    int threads = 0);
EvalReport evaluate_serial(const PriorModel& model, const Corpus& test, const NormConfig& cfg);

// Per-question-type accuracy drop, descending. Types with n = 0 on either
// side are excluded.
std::vector<DropEntry> drop_report(const EvalReport& eval_a, const EvalReport& eval_b);

std::string drop_report_csv(const std::vector<DropEntry>& drops);

}  // namespace compsplit

#endif
