#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "compsplit/priors.hpp"
#include "compsplit/splitter.hpp"
#include "compsplit/synth.hpp"
#include "compsplit/toml_lite.hpp"
#include "compsplit/util.hpp"
#include "testutil.hpp"

using namespace compsplit;
using testutil::TempDir;

namespace {

std::string corpus_fingerprint(const Corpus& c) {
  Fnv1a h;
  for (const QaRecord& r : c.records) {
    h.update(std::to_string(r.question_id));
    h.update(r.question_text);
    h.update(r.ground_truth_answer);
    h.update(std::to_string(r.image_id));
    for (const std::string& a : r.human_answers) h.update(a);
    h.update(r.question_type);
    h.update("\n");
  }
  return h.hex();
}

}  // namespace

TEST_CASE("generate: degenerate distribution gives identical QA everywhere") {
  SynthConfig cfg;
  cfg.templates = {{"What color is the plate?", "what color", 1.0, ""}};
  cfg.bias = {{0, "", 1.0, {{{"green", 1.0}}}}};
  cfg.n_records = 25;
  cfg.n_human_answers = 10;
  cfg.agreement = 1.0;
  cfg.seed = 3;
  const Corpus c = generate(cfg);
  REQUIRE(c.size() == 25);
  for (const QaRecord& r : c.records) {
    CHECK(r.question_text == "what color is the plate?");
    CHECK(r.ground_truth_answer == "green");
  }
}

TEST_CASE("generate: agreement 1.0 makes all human answers the ground truth") {
  SynthConfig cfg = preset("color-bias");
  cfg.agreement = 1.0;
  cfg.n_records = 60;
  const Corpus c = generate(cfg);
  for (const QaRecord& r : c.records) {
    REQUIRE(r.human_answers.size() == 10);
    for (const std::string& h : r.human_answers) CHECK(h == r.ground_truth_answer);
  }
}

TEST_CASE("generate: agreement 0.8 gives exactly 8 of 10 ground-truth copies") {
  SynthConfig cfg = preset("color-bias");
  cfg.agreement = 0.8;
  cfg.n_records = 40;
  const Corpus c = generate(cfg);
  for (const QaRecord& r : c.records) {
    int matches = 0;
    for (const std::string& h : r.human_answers) {
      if (h == r.ground_truth_answer) ++matches;
    }
    // noise is drawn from the vocabulary excluding the ground truth, so the
    // count is exact
    CHECK(matches == 8);
    CHECK(r.human_answers.size() == 10);
  }
}

TEST_CASE("generate: bit-deterministic per seed, different across seeds") {
  SynthConfig cfg = preset("sport-bias");
  cfg.n_records = 300;
  const std::string fp1 = corpus_fingerprint(generate(cfg));
  const std::string fp2 = corpus_fingerprint(generate(cfg));
  CHECK(fp1 == fp2);
  cfg.seed += 1;
  CHECK(corpus_fingerprint(generate(cfg)) != fp1);
}

TEST_CASE("generate: corpora pass corpus validation and id scheme") {
  for (const std::string& name : preset_names()) {
    SynthConfig cfg = preset(name);
    cfg.n_records = 120;
    const Corpus c = generate(cfg);
    validate_corpus(c);  // throws on violation
    CHECK(c.records.front().question_id == 1);
    CHECK(c.records.back().question_id == 120);
  }
}

TEST_CASE("generate: bijection bias yields unseen pairings under greedy split") {
  // 2x2 vocabulary with dominant diagonal and rare crossings: the guide
  // example for compositional novelty, traceable by hand
  SynthConfig cfg;
  cfg.templates = {{"What color is the {object}?", "what color", 1.0, "object"}};
  cfg.vocab["object"] = {"plate", "cone"};
  cfg.bias = {
      {0, "plate", 0.5, {{{"green", 0.9}, {"orange", 0.1}}}},
      {0, "cone", 0.5, {{{"orange", 0.9}, {"green", 0.1}}}},
  };
  cfg.n_records = 600;
  cfg.seed = 11;
  const Corpus corpus = generate(cfg);
  const NormConfig norm = NormConfig::defaults();
  const std::vector<QaGroup> groups = build_groups(corpus, norm);
  REQUIRE(groups.size() == 4);  // plate/cone x green/orange

  SplitConfig scfg;
  const SplitAssignment a = greedy_split(groups, scfg);
  const SplitOutput out = materialize(a, groups, corpus);

  // test contains (object, answer) pairings that never occur in train
  std::set<std::pair<std::string, std::string>> train_pairs;
  std::set<std::pair<std::string, std::string>> test_pairs;
  auto obj_of = [](const QaRecord& r) {
    return r.question_text.find("plate") != std::string::npos ? std::string("plate")
                                                              : std::string("cone");
  };
  for (const QaRecord& r : out.train.records) {
    train_pairs.insert({obj_of(r), r.ground_truth_answer});
  }
  for (const QaRecord& r : out.test.records) {
    test_pairs.insert({obj_of(r), r.ground_truth_answer});
  }
  REQUIRE(!test_pairs.empty());
  for (const auto& pair : test_pairs) {
    CHECK(train_pairs.count(pair) == 0);
  }
}

TEST_CASE("preset: color-bias contains the seen-concepts/unseen-composition pattern") {
  SynthConfig cfg = preset("color-bias");
  cfg.n_records = 2000;
  const Corpus c = generate(cfg);
  std::int64_t plate_green = 0;
  std::int64_t plate_red = 0;
  std::int64_t light_red = 0;
  for (const QaRecord& r : c.records) {
    const bool plate = r.question_text.find("plate") != std::string::npos;
    const bool light = r.question_text.find("stop light") != std::string::npos;
    if (plate && r.ground_truth_answer == "green") ++plate_green;
    if (plate && r.ground_truth_answer == "red") ++plate_red;
    if (light && r.ground_truth_answer == "red") ++light_red;
  }
  // dominant pairing, rare crossed pairing, and the concept elsewhere
  CHECK(plate_green > plate_red);
  CHECK(plate_red > 0);
  CHECK(light_red > 0);

  // the paraphrase templates collapse to one reduced form
  const NormConfig norm = NormConfig::defaults();
  std::set<std::string> plate_forms;
  for (const QaRecord& r : c.records) {
    if (r.question_text.find("plate") != std::string::npos) {
      plate_forms.insert(reduce(r.question_text, norm).joined());
    }
  }
  CHECK(plate_forms.size() == 1);
}

TEST_CASE("preset: unknown name lists the presets") {
  CHECK_THROWS_WITH_AS(preset("nope"), doctest::Contains("color-bias"), UsageError);
  CHECK_THROWS_WITH_AS(preset("nope"), doctest::Contains("sport-bias"), UsageError);
  CHECK_THROWS_WITH_AS(preset("nope"), doctest::Contains("poisoned-type"), UsageError);
}

TEST_CASE("config validation: bad distributions are rejected") {
  SynthConfig cfg;
  cfg.templates = {{"q {x}?", "q", 1.0, "x"}};
  cfg.vocab["x"] = {"a"};
  cfg.bias = {{0, "a", 1.0, {{{"y", 0.5}, {"z", 0.4}}}}};  // sums to 0.9
  cfg.n_records = 5;
  CHECK_THROWS_AS(cfg.validate(), Error);

  cfg.bias[0].answers = {{{"y", 0.5}, {"z", 0.5}}};
  CHECK_NOTHROW(cfg.validate());

  cfg.n_records = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.n_records = 5;

  cfg.bias[0].object = "missing";
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("config files: json and toml parse to the same corpus") {
  const std::string json_text = R"({
    "n_records": 40,
    "n_human_answers": 4,
    "agreement": 0.75,
    "seed": 9,
    "templates": [
      {"text": "What sport is the {person} playing?", "question_type": "what sport",
       "weight": 1.0}
    ],
    "vocab": {"person": ["man", "woman"]},
    "bias": [
      {"template": 0, "object": "man", "weight": 0.6,
       "answers": {"tennis": 0.9, "skiing": 0.1}},
      {"template": 0, "object": "woman", "weight": 0.4,
       "answers": {"skiing": 0.9, "tennis": 0.1}}
    ]
  })";
  const std::string toml_text = R"(n_records = 40
n_human_answers = 4
agreement = 0.75
seed = 9

[[templates]]
text = "What sport is the {person} playing?"
question_type = "what sport"
weight = 1.0

[vocab]
person = ["man", "woman"]

[[bias]]
template = 0
object = "man"
weight = 0.6
answers = { tennis = 0.9, skiing = 0.1 }

[[bias]]
template = 0
object = "woman"
weight = 0.4
answers = { skiing = 0.9, tennis = 0.1 }
)";
  TempDir dir("synth_cfg");
  write_text_file(dir.file("c.json"), json_text);
  write_text_file(dir.file("c.toml"), toml_text);
  const Corpus a = generate(load_synth_config(dir.file("c.json")));
  const Corpus b = generate(load_synth_config(dir.file("c.toml")));
  CHECK(corpus_fingerprint(a) == corpus_fingerprint(b));
  REQUIRE(a.size() == 40);
  for (const QaRecord& r : a.records) REQUIRE(r.human_answers.size() == 4);
}

TEST_CASE("toml_lite: errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_toml_lite("a = \n"), doctest::Contains("line 1"), Error);
  CHECK_THROWS_WITH_AS(parse_toml_lite("x = 1\nbad line\n"), doctest::Contains("line 2"),
                       Error);
  const nlohmann::json j = parse_toml_lite("# comment\nkey = \"v\"\nn = 3\nf = 1.5\nb = true\n");
  CHECK(j.at("key") == "v");
  CHECK(j.at("n") == 3);
  CHECK(j.at("f") == 1.5);
  CHECK(j.at("b") == true);
}

TEST_CASE("poisoned-type: compositional accuracy is zero for the poisoned type") {
  SynthConfig sc = preset("poisoned-type");
  sc.n_records = 2500;
  const Corpus corpus = generate(sc);
  const NormConfig norm = NormConfig::defaults();
  const std::vector<QaGroup> groups = build_groups(corpus, norm);
  SplitConfig scfg;
  const SplitOutput out = materialize(greedy_split(groups, scfg), groups, corpus);

  // the poisoned type is present on the test side
  std::int64_t poisoned_test = 0;
  for (const QaRecord& r : out.test.records) {
    if (r.question_type == "what room is") ++poisoned_test;
  }
  REQUIRE(poisoned_test > 0);

  const PriorModel m = fit_prior(out.train, PriorKeying::QuestionType, norm);
  std::int64_t numer = 0;
  for (const QaRecord& r : out.test.records) {
    if (r.question_type != "what room is") continue;
    numer += vqa_accuracy_numerator(m.predict(r.question_type), r.human_answers,
                                    r.ground_truth_answer);
  }
  CHECK(numer == 0);
}
