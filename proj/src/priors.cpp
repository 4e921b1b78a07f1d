#include "compsplit/priors.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "compsplit/util.hpp"

namespace compsplit {

namespace {

std::string record_key(const QaRecord& r, PriorKeying keying, const NormConfig& cfg) {
  if (keying == PriorKeying::ReducedForm) {
    return reduce(r.question_text, cfg).joined();
  }
  return r.question_type.empty()
             ? derive_question_type(r.question_text, default_question_type_prefixes())
             : r.question_type;
}

std::string record_answer_type(const QaRecord& r) {
  if (r.answer_type == "yes/no" || r.answer_type == "number" || r.answer_type == "other") {
    return r.answer_type;
  }
  return derive_answer_type(r.ground_truth_answer);
}

struct ScoredRecord {
  int numerator = 0;
  std::string question_key;
  std::string answer_type;
};

EvalReport aggregate(const PriorModel& model, const std::vector<ScoredRecord>& scored) {
  EvalReport report;
  report.keying = model.keying;
  std::map<std::string, EvalBucket> per_qtype;
  for (const ScoredRecord& s : scored) {
    report.overall.score_numerator += s.numerator;
    report.overall.n += 1;
    EvalBucket& at = report.by_answer_type[s.answer_type];
    at.score_numerator += s.numerator;
    at.n += 1;
    EvalBucket& qt = per_qtype[s.question_key];
    qt.score_numerator += s.numerator;
    qt.n += 1;
  }
  report.by_question_type.reserve(per_qtype.size());
  for (const auto& [qtype, bucket] : per_qtype) {
    report.by_question_type.push_back({qtype, bucket.accuracy(), bucket.n});
  }
  std::sort(report.by_question_type.begin(), report.by_question_type.end(),
            [](const QtypeAccuracy& a, const QtypeAccuracy& b) {
              if (a.n != b.n) return a.n > b.n;
              return a.question_type < b.question_type;
            });
  return report;
}

// The question-type key used for the per-type breakdown of an EvalReport.
// Matches the keying used by the model when keying == QuestionType; for
// ReducedForm models the breakdown still reports by question type so that
// drop reports stay comparable across keyings.
std::string breakdown_key(const QaRecord& r) {
  return r.question_type.empty()
             ? derive_question_type(r.question_text, default_question_type_prefixes())
             : r.question_type;
}

ScoredRecord score_record(const PriorModel& model, const QaRecord& r, const NormConfig& cfg) {
  ScoredRecord s;
  const std::string key = record_key(r, model.keying, cfg);
  const std::string& pred = model.predict(key);
  s.numerator = vqa_accuracy_numerator(pred, r.human_answers, r.ground_truth_answer);
  s.question_key = breakdown_key(r);
  s.answer_type = record_answer_type(r);
  return s;
}

}  // namespace

const char* to_string(PriorKeying keying) {
  return keying == PriorKeying::QuestionType ? "question_type" : "reduced_form";
}

PriorModel fit_prior(const Corpus& train, PriorKeying keying, const NormConfig& cfg) {
  if (train.records.empty()) throw Error("fit_prior: empty train corpus");
  PriorModel model;
  model.keying = keying;

  std::unordered_map<std::string, std::unordered_map<std::string, std::int64_t>> counts;
  std::unordered_map<std::string, std::int64_t> global;
  for (const QaRecord& r : train.records) {
    ++counts[record_key(r, keying, cfg)][r.ground_truth_answer];
    ++global[r.ground_truth_answer];
  }

  auto argmax = [](const std::unordered_map<std::string, std::int64_t>& m) {
    std::pair<std::string, std::int64_t> best{"", -1};
    for (const auto& [answer, count] : m) {
      if (count > best.second || (count == best.second && answer < best.first)) {
        best = {answer, count};
      }
    }
    return best;
  };

  model.table.reserve(counts.size());
  for (const auto& [key, answers] : counts) {
    model.table.emplace(key, argmax(answers));
  }
  model.fallback_answer = argmax(global).first;
  return model;
}

int vqa_accuracy_numerator(const std::string& predicted,
                           const std::vector<std::string>& human_answers,
                           const std::string& ground_truth) {
  if (human_answers.empty()) {
    return predicted == ground_truth ? 3 : 0;
  }
  int matches = 0;
  for (const std::string& h : human_answers) {
    if (h == predicted) ++matches;
  }
  return std::min(matches, 3);
}

double vqa_accuracy(const std::string& predicted, const std::vector<std::string>& human_answers,
                    const std::string& ground_truth) {
  return vqa_accuracy_numerator(predicted, human_answers, ground_truth) / 3.0;
}

EvalReport evaluate_serial(const PriorModel& model, const Corpus& test, const NormConfig& cfg) {
  std::vector<ScoredRecord> scored(test.records.size());
  for (std::size_t i = 0; i < test.records.size(); ++i) {
    scored[i] = score_record(model, test.records[i], cfg);
  }
  return aggregate(model, scored);
}

EvalReport evaluate(const PriorModel& model, const Corpus& test, const NormConfig& cfg,
                    int threads) {
  std::vector<ScoredRecord> scored(test.records.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(test.records.size());
#ifdef _OPENMP
  if (threads > 0) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      scored[static_cast<std::size_t>(i)] =
          score_record(model, test.records[static_cast<std::size_t>(i)], cfg);
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      scored[static_cast<std::size_t>(i)] =
          score_record(model, test.records[static_cast<std::size_t>(i)], cfg);
    }
  }
#else
  (void)threads;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    scored[static_cast<std::size_t>(i)] =
        score_record(model, test.records[static_cast<std::size_t>(i)], cfg);
  }
#endif
  return aggregate(model, scored);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json by_at = nlohmann::json::object();
  for (const auto& [atype, bucket] : by_answer_type) {
    by_at[atype] = {{"accuracy", bucket.accuracy()},
                    {"n", bucket.n},
                    {"score_numerator", bucket.score_numerator}};
  }
  nlohmann::json by_qt = nlohmann::json::array();
  for (const QtypeAccuracy& q : by_question_type) {
    by_qt.push_back({{"question_type", q.question_type}, {"accuracy", q.accuracy}, {"n", q.n}});
  }
  return {{"keying", to_string(keying)},
          {"overall",
           {{"accuracy", overall.accuracy()},
            {"n", overall.n},
            {"score_numerator", overall.score_numerator}}},
          {"by_answer_type", by_at},
          {"by_question_type", by_qt}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.keying = j.at("keying").get<std::string>() == "reduced_form" ? PriorKeying::ReducedForm
                                                                 : PriorKeying::QuestionType;
  r.overall.score_numerator = j.at("overall").at("score_numerator").get<std::int64_t>();
  r.overall.n = j.at("overall").at("n").get<std::int64_t>();
  for (const auto& [atype, bucket] : j.at("by_answer_type").items()) {
    r.by_answer_type[atype] = {bucket.at("score_numerator").get<std::int64_t>(),
                               bucket.at("n").get<std::int64_t>()};
  }
  for (const auto& entry : j.at("by_question_type")) {
    r.by_question_type.push_back({entry.at("question_type").get<std::string>(),
                                  entry.at("accuracy").get<double>(),
                                  entry.at("n").get<std::int64_t>()});
  }
  return r;
}

std::string EvalReport::to_csv() const {
  std::string out = "scope,key,accuracy,n\n";
  out += "overall,," + std::to_string(overall.accuracy()) + "," + std::to_string(overall.n) + "\n";
  for (const auto& [atype, bucket] : by_answer_type) {
    out += "answer_type," + csv_escape(atype) + "," + std::to_string(bucket.accuracy()) + "," +
           std::to_string(bucket.n) + "\n";
  }
  for (const QtypeAccuracy& q : by_question_type) {
    out += "question_type," + csv_escape(q.question_type) + "," + std::to_string(q.accuracy) +
           "," + std::to_string(q.n) + "\n";
  }
  return out;
}

std::vector<DropEntry> drop_report(const EvalReport& eval_a, const EvalReport& eval_b) {
  std::map<std::string, std::pair<QtypeAccuracy, QtypeAccuracy>> joined;
  for (const QtypeAccuracy& q : eval_a.by_question_type) joined[q.question_type].first = q;
  for (const QtypeAccuracy& q : eval_b.by_question_type) joined[q.question_type].second = q;

  std::vector<DropEntry> drops;
  for (const auto& [qtype, pair] : joined) {
    if (pair.first.n == 0 || pair.second.n == 0) continue;  // absent on one side
    DropEntry d;
    d.question_type = qtype;
    d.accuracy_a = pair.first.accuracy;
    d.accuracy_b = pair.second.accuracy;
    d.drop = d.accuracy_a - d.accuracy_b;
    d.n_a = pair.first.n;
    d.n_b = pair.second.n;
    drops.push_back(std::move(d));
  }
  std::sort(drops.begin(), drops.end(), [](const DropEntry& a, const DropEntry& b) {
    if (a.drop != b.drop) return a.drop > b.drop;
    return a.question_type < b.question_type;
  });
  return drops;
}

std::string drop_report_csv(const std::vector<DropEntry>& drops) {
  std::string out = "question_type,accuracy_a,accuracy_b,drop,n_a,n_b\n";
  for (const DropEntry& d : drops) {
    out += csv_escape(d.question_type) + "," + std::to_string(d.accuracy_a) + "," +
           std::to_string(d.accuracy_b) + "," + std::to_string(d.drop) + "," +
           std::to_string(d.n_a) + "," + std::to_string(d.n_b) + "\n";
  }
  return out;
}

}  // namespace compsplit
