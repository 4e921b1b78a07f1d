#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "compsplit/priors.hpp"
#include "compsplit/splitter.hpp"
#include "compsplit/synth.hpp"
#include "compsplit/util.hpp"
#include "testutil.hpp"

using namespace compsplit;
using testutil::make_corpus;
using testutil::make_record;

namespace {

SplitOutput greedy_output(const Corpus& corpus, const NormConfig& cfg) {
  const std::vector<QaGroup> groups = build_groups(corpus, cfg);
  SplitConfig scfg;
  return materialize(greedy_split(groups, scfg), groups, corpus);
}

// Exhaustive self-fit oracle: the consensus score a per-key majority
// predictor earns on the corpus it was fitted on, computed by direct
// enumeration over candidate constant answers per key.
double self_fit_bound(const Corpus& corpus) {
  std::map<std::string, std::vector<const QaRecord*>> by_key;
  for (const QaRecord& r : corpus.records) by_key[r.question_type].push_back(&r);
  std::int64_t numer = 0;
  for (const auto& [key, records] : by_key) {
    std::set<std::string> candidates;
    for (const QaRecord* r : records) candidates.insert(r->ground_truth_answer);
    std::int64_t best = -1;
    for (const std::string& cand : candidates) {
      std::int64_t s = 0;
      for (const QaRecord* r : records) {
        s += vqa_accuracy_numerator(cand, r->human_answers, r->ground_truth_answer);
      }
      best = std::max(best, s);
    }
    numer += best;
  }
  return static_cast<double>(numer) / (3.0 * static_cast<double>(corpus.size()));
}

}  // namespace

TEST_CASE("vqa_accuracy: consensus formula") {
  std::vector<std::string> humans(10, "other");
  humans[0] = "tennis";
  humans[1] = "tennis";
  humans[2] = "tennis";
  CHECK(vqa_accuracy("tennis", humans) == doctest::Approx(1.0).epsilon(1e-12));
  humans[2] = "x";
  CHECK(vqa_accuracy("tennis", humans) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  humans[1] = "x";
  CHECK(vqa_accuracy("tennis", humans) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  humans[0] = "x";
  CHECK(vqa_accuracy("tennis", humans) == doctest::Approx(0.0).epsilon(1e-12));
  // more than 3 matches saturates
  CHECK(vqa_accuracy("other", humans) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vqa_accuracy: empty human answers fall back to exact match") {
  CHECK(vqa_accuracy("yes", {}, "yes") == 1.0);
  CHECK(vqa_accuracy("no", {}, "yes") == 0.0);
}

TEST_CASE("vqa_accuracy: value set with >=3 entries is {0, 1/3, 2/3, 1}") {
  std::mt19937_64 gen(3);
  const std::vector<std::string> vocab = {"a", "b", "c"};
  const std::set<int> allowed = {0, 1, 2, 3};
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> humans;
    const std::size_t n = 3 + uniform_below(gen, 8);
    for (std::size_t k = 0; k < n; ++k) humans.push_back(vocab[uniform_below(gen, 3)]);
    const int numer = vqa_accuracy_numerator("a", humans, "a");
    CHECK(allowed.count(numer) == 1);
    CHECK(vqa_accuracy("a", humans) == doctest::Approx(numer / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("fit_prior: majority table and fallback") {
  std::vector<QaRecord> records;
  for (int i = 0; i < 5; ++i) {
    records.push_back(make_record(i + 1, 1, "what sport is this?", "tennis", "what sport"));
  }
  for (int i = 0; i < 2; ++i) {
    records.push_back(make_record(i + 6, 1, "what sport is this?", "skiing", "what sport"));
  }
  const Corpus train = make_corpus(std::move(records));
  const NormConfig cfg = NormConfig::defaults();
  const PriorModel m = fit_prior(train, PriorKeying::QuestionType, cfg);
  REQUIRE(m.table.count("what sport") == 1);
  CHECK(m.table.at("what sport").first == "tennis");
  CHECK(m.table.at("what sport").second == 5);
  CHECK(m.fallback_answer == "tennis");
  CHECK(m.predict("never seen") == "tennis");
}

TEST_CASE("fit_prior: single record and lexicographic ties") {
  const NormConfig cfg = NormConfig::defaults();
  const Corpus one = make_corpus({make_record(1, 1, "is it daytime?", "yes", "is it")});
  const PriorModel m1 = fit_prior(one, PriorKeying::QuestionType, cfg);
  CHECK(m1.table.at("is it").first == "yes");
  CHECK(m1.fallback_answer == "yes");

  const Corpus tie = make_corpus({
      make_record(1, 1, "q?", "b", "t"),
      make_record(2, 1, "q?", "a", "t"),
      make_record(3, 1, "q?", "b", "t"),
      make_record(4, 1, "q?", "a", "t"),
  });
  const PriorModel m2 = fit_prior(tie, PriorKeying::QuestionType, cfg);
  CHECK(m2.table.at("t").first == "a");  // tie broken lexicographically
  CHECK(m2.fallback_answer == "a");

  CHECK_THROWS_AS(fit_prior(Corpus{}, PriorKeying::QuestionType, cfg), Error);
}

TEST_CASE("evaluate: perfect prior scores 1.0") {
  const NormConfig cfg = NormConfig::defaults();
  std::vector<QaRecord> records;
  for (int i = 0; i < 20; ++i) {
    const std::string qtype = i % 2 ? "what color" : "what sport";
    const std::string answer = i % 2 ? "green" : "tennis";
    records.push_back(make_record(i + 1, i, "q " + qtype + "?", answer, qtype,
                                  std::vector<std::string>(10, answer)));
  }
  const Corpus c = make_corpus(std::move(records));
  const PriorModel m = fit_prior(c, PriorKeying::QuestionType, cfg);
  const EvalReport r = evaluate(m, c, cfg);
  CHECK(r.overall.accuracy() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.overall.n == 20);
}

TEST_CASE("evaluate: engineered compositional split scores exactly 0") {
  // poisoned-type preset: every greedy test record's question-type-majority
  // train answer is wrong, and agreement=1 removes partial credit
  SynthConfig sc = preset("poisoned-type");
  sc.n_records = 3000;
  const Corpus corpus = generate(sc);
  const NormConfig cfg = NormConfig::defaults();
  const SplitOutput out = greedy_output(corpus, cfg);
  REQUIRE(out.test.size() > 0);
  const PriorModel m = fit_prior(out.train, PriorKeying::QuestionType, cfg);
  const EvalReport r = evaluate(m, out.test, cfg);
  CHECK(r.overall.accuracy() == 0.0);
  CHECK(r.overall.score_numerator == 0);
}

TEST_CASE("evaluate: report invariants") {
  SynthConfig sc = preset("sport-bias");
  sc.n_records = 1500;
  const Corpus corpus = generate(sc);
  const NormConfig cfg = NormConfig::defaults();
  const SplitOutput out = greedy_output(corpus, cfg);
  const PriorModel m = fit_prior(out.train, PriorKeying::QuestionType, cfg);
  const EvalReport r = evaluate(m, out.test, cfg);

  // overall equals the record-weighted mean of the answer-type buckets
  std::int64_t numer = 0;
  std::int64_t n = 0;
  for (const auto& [atype, bucket] : r.by_answer_type) {
    numer += bucket.score_numerator;
    n += bucket.n;
  }
  CHECK(numer == r.overall.score_numerator);
  CHECK(n == r.overall.n);

  // per-question-type ns sum to the total as well
  std::int64_t qn = 0;
  for (const QtypeAccuracy& q : r.by_question_type) qn += q.n;
  CHECK(qn == r.overall.n);

  // permuting test record order leaves the report unchanged
  Corpus shuffled = out.test;
  std::reverse(shuffled.records.begin(), shuffled.records.end());
  const EvalReport r2 = evaluate(m, shuffled, cfg);
  CHECK(r2.to_json().dump() == r.to_json().dump());

  // JSON round-trip preserves the report
  const EvalReport back = EvalReport::from_json(r.to_json());
  CHECK(back.to_json().dump() == r.to_json().dump());
}

TEST_CASE("evaluate: reduced-form keying works and is deterministic") {
  SynthConfig sc = preset("color-bias");
  sc.n_records = 800;
  const Corpus corpus = generate(sc);
  const NormConfig cfg = NormConfig::defaults();
  const SplitOutput out = greedy_output(corpus, cfg);
  const PriorModel m = fit_prior(out.train, PriorKeying::ReducedForm, cfg);
  const EvalReport a = evaluate(m, out.test, cfg);
  const EvalReport b = evaluate(m, out.test, cfg);
  CHECK(a.to_json().dump() == b.to_json().dump());
  // leakage is zero on (form, answer) pairs, but bare reduced forms can
  // straddle sides; where a test form is seen in train, the prediction is
  // the train majority for that form, which is never the test record's
  // answer within the same group key
  for (const QaRecord& rec : out.test.records) {
    const std::string key = reduce(rec.question_text, cfg).joined();
    auto it = m.table.find(key);
    if (it != m.table.end()) {
      // the table answer comes from train; equal answers would mean the
      // same (form, answer) pair on both sides, i.e. leakage
      bool same_pair_in_train = false;
      for (const QaRecord& tr : out.train.records) {
        if (tr.ground_truth_answer == rec.ground_truth_answer &&
            reduce(tr.question_text, cfg).joined() == key) {
          same_pair_in_train = true;
          break;
        }
      }
      CHECK(!same_pair_in_train);
    }
  }
}

TEST_CASE("property: self-fit beats any constant predictor (small corpora)") {
  const NormConfig cfg = NormConfig::defaults();
  for (int i = 0; i < 6; ++i) {
    SynthConfig sc = preset(preset_names()[i % 3]);
    sc.n_records = 60 + 25 * i;
    sc.seed = 400 + i;
    const Corpus corpus = generate(sc);
    const PriorModel m = fit_prior(corpus, PriorKeying::QuestionType, cfg);
    const EvalReport self = evaluate(m, corpus, cfg);

    // every constant predictor is no better
    std::set<std::string> answers;
    for (const QaRecord& r : corpus.records) answers.insert(r.ground_truth_answer);
    for (const std::string& cand : answers) {
      std::int64_t numer = 0;
      for (const QaRecord& r : corpus.records) {
        numer += vqa_accuracy_numerator(cand, r.human_answers, r.ground_truth_answer);
      }
      CHECK(self.overall.score_numerator >= numer);
    }
    // the exhaustive per-key bound caps it from above
    CHECK(self.overall.accuracy() <= self_fit_bound(corpus) + 1e-12);
  }

  // with full annotator agreement the frequency majority IS the
  // consensus-optimal per-key constant, so the bound is attained exactly
  SynthConfig sc = preset("poisoned-type");
  sc.n_records = 180;
  const Corpus corpus = generate(sc);
  const PriorModel m = fit_prior(corpus, PriorKeying::QuestionType, cfg);
  const EvalReport self = evaluate(m, corpus, cfg);
  CHECK(self.overall.accuracy() == doctest::Approx(self_fit_bound(corpus)).epsilon(1e-12));
}

TEST_CASE("property: compositional drop on biased synthetic corpora") {
  const NormConfig cfg = NormConfig::defaults();
  SynthConfig sc = preset("sport-bias");
  sc.n_records = 6000;
  const Corpus corpus = generate(sc);

  const SplitOutput comp = greedy_output(corpus, cfg);
  const SplitOutput rand = random_split(corpus, Fraction{1, 3}, 17);

  const EvalReport comp_eval =
      evaluate(fit_prior(comp.train, PriorKeying::QuestionType, cfg), comp.test, cfg);
  const EvalReport rand_eval =
      evaluate(fit_prior(rand.train, PriorKeying::QuestionType, cfg), rand.test, cfg);
  CHECK(rand_eval.overall.accuracy() > comp_eval.overall.accuracy());
}

TEST_CASE("drop_report: ordering, zeros, and poisoned type ranks first") {
  EvalReport a;
  EvalReport b;
  a.by_question_type = {{"what room is", 0.6, 100}, {"what color", 0.5, 200}, {"is it", 0.5, 50}};
  b.by_question_type = {{"what room is", 0.0, 90}, {"what color", 0.45, 210}, {"ghost", 0.2, 10}};
  const std::vector<DropEntry> drops = drop_report(a, b);
  REQUIRE(drops.size() == 2);  // "is it" missing in b, "ghost" missing in a
  CHECK(drops[0].question_type == "what room is");
  CHECK(drops[0].drop == doctest::Approx(0.6));
  CHECK(drops[0].n_a == 100);
  CHECK(drops[0].n_b == 90);
  CHECK(drops[1].question_type == "what color");

  const std::vector<DropEntry> zero = drop_report(a, a);
  for (const DropEntry& d : zero) CHECK(d.drop == doctest::Approx(0.0));
}

TEST_CASE("drop_report: poisoned preset end to end") {
  SynthConfig sc = preset("poisoned-type");
  sc.n_records = 3000;
  const Corpus corpus = generate(sc);
  const NormConfig cfg = NormConfig::defaults();

  const SplitOutput comp = greedy_output(corpus, cfg);
  const SplitOutput rand = random_split(corpus, Fraction{1, 3}, 5);
  const EvalReport comp_eval =
      evaluate(fit_prior(comp.train, PriorKeying::QuestionType, cfg), comp.test, cfg);
  const EvalReport rand_eval =
      evaluate(fit_prior(rand.train, PriorKeying::QuestionType, cfg), rand.test, cfg);
  const std::vector<DropEntry> drops = drop_report(rand_eval, comp_eval);
  REQUIRE(!drops.empty());
  CHECK(drops[0].question_type == "what room is");
}
