#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "compsplit/corpus.hpp"
#include "compsplit/synth.hpp"
#include "compsplit/util.hpp"
#include "testutil.hpp"

using namespace compsplit;
using testutil::TempDir;

namespace {

void write_file(const std::string& path, const std::string& content) {
  write_text_file(path, content);
}

std::string questions_doc() {
  return R"({"questions":[
    {"question_id": 2, "image_id": 10, "question": "What color are the cones?"},
    {"question_id": 1, "image_id": 10, "question": "Is it daytime?"},
    {"question_id": 3, "image_id": 11, "question": "What sport is this?"}
  ]})";
}

std::string annotations_doc() {
  return R"({"annotations":[
    {"question_id": 1, "image_id": 10, "multiple_choice_answer": "Yes",
     "answers": [{"answer": "yes"}, {"answer": "Yes "}, {"answer": "no"}],
     "question_type": "is it", "answer_type": "yes/no"},
    {"question_id": 2, "image_id": 10, "multiple_choice_answer": "orange",
     "answers": [{"answer": "orange"}, {"answer": "orange"}, {"answer": "red"}],
     "question_type": "what color", "answer_type": "other"},
    {"question_id": 3, "image_id": 11, "multiple_choice_answer": "Tennis",
     "answers": [{"answer": "tennis"}, {"answer": "tennis"}, {"answer": "tennis"}],
     "question_type": "what sport", "answer_type": "other"}
  ]})";
}

}  // namespace

TEST_CASE("load_vqa: join, sort, lowercase, trim") {
  TempDir dir("vqa");
  write_file(dir.file("q.json"), questions_doc());
  write_file(dir.file("a.json"), annotations_doc());
  const Corpus c = load_vqa(dir.file("q.json"), dir.file("a.json"));
  REQUIRE(c.size() == 3);
  CHECK(c.records[0].question_id == 1);
  CHECK(c.records[1].question_id == 2);
  CHECK(c.records[2].question_id == 3);
  CHECK(c.records[0].question_text == "is it daytime?");
  CHECK(c.records[0].ground_truth_answer == "yes");
  CHECK(c.records[0].human_answers == std::vector<std::string>{"yes", "yes", "no"});
  CHECK(c.records[1].image_id == 10);
  CHECK(c.records[2].ground_truth_answer == "tennis");
  CHECK(c.records[2].question_type == "what sport");
  CHECK(c.records[2].answer_type == "other");
}

TEST_CASE("load_vqa: empty arrays give an empty corpus") {
  TempDir dir("vqa_empty");
  write_file(dir.file("q.json"), R"({"questions":[]})");
  write_file(dir.file("a.json"), R"({"annotations":[]})");
  const Corpus c = load_vqa(dir.file("q.json"), dir.file("a.json"));
  CHECK(c.empty());
}

TEST_CASE("load_vqa: question without annotation names the id") {
  TempDir dir("vqa_join");
  write_file(dir.file("q.json"),
             R"({"questions":[{"question_id": 7, "image_id": 1, "question": "Q?"}]})");
  write_file(dir.file("a.json"), R"({"annotations":[]})");
  CHECK_THROWS_WITH_AS(load_vqa(dir.file("q.json"), dir.file("a.json")),
                       doctest::Contains("7"), Error);
}

TEST_CASE("load_vqa: orphan annotation and duplicates rejected") {
  TempDir dir("vqa_orphan");
  write_file(dir.file("q.json"), R"({"questions":[]})");
  write_file(dir.file("a.json"),
             R"({"annotations":[{"question_id": 9, "image_id": 1,
                 "multiple_choice_answer": "x", "answers": []}]})");
  CHECK_THROWS_WITH_AS(load_vqa(dir.file("q.json"), dir.file("a.json")),
                       doctest::Contains("9"), Error);

  write_file(dir.file("qdup.json"),
             R"({"questions":[{"question_id": 4, "image_id": 1, "question": "a?"},
                              {"question_id": 4, "image_id": 1, "question": "b?"}]})");
  write_file(dir.file("adup.json"),
             R"({"annotations":[{"question_id": 4, "image_id": 1,
                 "multiple_choice_answer": "x", "answers": []}]})");
  CHECK_THROWS_WITH_AS(load_vqa(dir.file("qdup.json"), dir.file("adup.json")),
                       doctest::Contains("4"), Error);
}

TEST_CASE("load_vqa: malformed JSON reports a byte position") {
  TempDir dir("vqa_bad");
  write_file(dir.file("q.json"), R"({"questions": [ {"question_id" 1} ]})");
  write_file(dir.file("a.json"), R"({"annotations":[]})");
  CHECK_THROWS_WITH_AS(load_vqa(dir.file("q.json"), dir.file("a.json")),
                       doctest::Contains("byte"), Error);
}

TEST_CASE("load_jsonl: three valid lines") {
  TempDir dir("jsonl");
  write_file(dir.file("c.jsonl"),
             "{\"id\": 1, \"question\": \"Is it daytime?\", \"answer\": \"yes\"}\n"
             "{\"id\": 2, \"question\": \"What color?\", \"answer\": \"Red\", \"image_id\": 5}\n"
             "{\"id\": 3, \"question\": \"How many?\", \"answer\": \"2\","
             " \"answers\": [\"2\", \"3\"]}\n");
  const Corpus c = load_jsonl(dir.file("c.jsonl"));
  REQUIRE(c.size() == 3);
  CHECK(c.records[0].image_id == 0);  // defaulted
  CHECK(c.records[1].image_id == 5);
  CHECK(c.records[1].ground_truth_answer == "red");
  CHECK(c.records[2].human_answers == std::vector<std::string>{"2", "3"});
  CHECK(c.records[0].human_answers.empty());
}

TEST_CASE("load_jsonl: missing mandatory field names the line") {
  TempDir dir("jsonl_missing");
  write_file(dir.file("c.jsonl"),
             "{\"id\": 1, \"question\": \"ok?\", \"answer\": \"yes\"}\n"
             "{\"id\": 2, \"question\": \"broken?\"}\n");
  CHECK_THROWS_WITH_AS(load_jsonl(dir.file("c.jsonl")), doctest::Contains("line 2"), Error);
}

TEST_CASE("load_jsonl: duplicate id rejected") {
  TempDir dir("jsonl_dup");
  write_file(dir.file("c.jsonl"),
             "{\"id\": 1, \"question\": \"a?\", \"answer\": \"x\"}\n"
             "{\"id\": 1, \"question\": \"b?\", \"answer\": \"y\"}\n");
  CHECK_THROWS_AS(load_jsonl(dir.file("c.jsonl")), Error);
}

TEST_CASE("load_jsonl: CRLF input equals LF input") {
  TempDir dir("jsonl_crlf");
  const std::string lf =
      "{\"id\": 1, \"question\": \"Is it daytime?\", \"answer\": \"yes\"}\n"
      "{\"id\": 2, \"question\": \"What color?\", \"answer\": \"red\"}\n";
  std::string crlf = lf;
  std::size_t pos = 0;
  while ((pos = crlf.find('\n', pos)) != std::string::npos) {
    crlf.replace(pos, 1, "\r\n");
    pos += 2;
  }
  write_file(dir.file("lf.jsonl"), lf);
  write_file(dir.file("crlf.jsonl"), crlf);
  const Corpus a = load_jsonl(dir.file("lf.jsonl"));
  const Corpus b = load_jsonl(dir.file("crlf.jsonl"));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].question_text == b.records[i].question_text);
    CHECK(a.records[i].ground_truth_answer == b.records[i].ground_truth_answer);
  }
}

TEST_CASE("export_split: round-trips through both formats") {
  SynthConfig sc = preset("color-bias");
  sc.n_records = 200;
  Corpus corpus = generate(sc);
  SplitOutput split;
  split.train.records.assign(corpus.records.begin(), corpus.records.begin() + 150);
  split.test.records.assign(corpus.records.begin() + 150, corpus.records.end());
  split.manifest.train = count_side(split.train);
  split.manifest.test = count_side(split.test);

  auto records_equal = [](const Corpus& a, const Corpus& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const QaRecord& x = a.records[i];
      const QaRecord& y = b.records[i];
      CHECK(x.question_id == y.question_id);
      CHECK(x.image_id == y.image_id);
      CHECK(x.question_text == y.question_text);
      CHECK(x.ground_truth_answer == y.ground_truth_answer);
      CHECK(x.human_answers == y.human_answers);
      CHECK(x.question_type == y.question_type);
      CHECK(x.answer_type == y.answer_type);
    }
  };

  TempDir vqa_dir("export_vqa");
  export_split(split, vqa_dir.str(), CorpusFormat::Vqa);
  records_equal(load_vqa(vqa_dir.file("train_questions.json"),
                         vqa_dir.file("train_annotations.json")),
                split.train);
  records_equal(load_vqa(vqa_dir.file("test_questions.json"),
                         vqa_dir.file("test_annotations.json")),
                split.test);

  TempDir jsonl_dir("export_jsonl");
  export_split(split, jsonl_dir.str(), CorpusFormat::Jsonl);
  records_equal(load_jsonl(jsonl_dir.file("train.jsonl")), split.train);
  records_equal(load_jsonl(jsonl_dir.file("test.jsonl")), split.test);
}

TEST_CASE("export_split: empty test side still writes valid files") {
  SplitOutput split;
  split.train.records.push_back(testutil::make_record(1, 1, "is it daytime?", "yes"));
  split.manifest.train = count_side(split.train);
  split.manifest.test = count_side(split.test);
  TempDir dir("export_empty");
  export_split(split, dir.str(), CorpusFormat::Vqa);
  const Corpus test = load_vqa(dir.file("test_questions.json"), dir.file("test_annotations.json"));
  CHECK(test.empty());
  const Corpus train =
      load_vqa(dir.file("train_questions.json"), dir.file("train_annotations.json"));
  CHECK(train.size() == 1);
}

TEST_CASE("manifest counts equal recomputed counts and partition size") {
  SynthConfig sc = preset("sport-bias");
  sc.n_records = 300;
  Corpus corpus = generate(sc);
  SplitOutput split;
  split.train.records.assign(corpus.records.begin(), corpus.records.begin() + 200);
  split.test.records.assign(corpus.records.begin() + 200, corpus.records.end());
  split.manifest.train = count_side(split.train);
  split.manifest.test = count_side(split.test);
  CHECK(split.manifest.train.questions + split.manifest.test.questions == 300);
  CHECK(split.manifest.train.questions == static_cast<std::int64_t>(split.train.size()));
  CHECK(split.manifest.train.answers ==
        static_cast<std::int64_t>(split.train.size()) * 10);  // 10 human answers each
}

TEST_CASE("loading is deterministic") {
  TempDir dir("det");
  write_file(dir.file("q.json"), questions_doc());
  write_file(dir.file("a.json"), annotations_doc());
  const Corpus a = load_vqa(dir.file("q.json"), dir.file("a.json"));
  const Corpus b = load_vqa(dir.file("q.json"), dir.file("a.json"));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].question_id == b.records[i].question_id);
    CHECK(a.records[i].question_text == b.records[i].question_text);
  }
}

TEST_CASE("derive_answer_type") {
  CHECK(derive_answer_type("yes") == "yes/no");
  CHECK(derive_answer_type("no") == "yes/no");
  CHECK(derive_answer_type("2") == "number");
  CHECK(derive_answer_type("4.5") == "number");
  CHECK(derive_answer_type("tennis") == "other");
  CHECK(derive_answer_type("2 dogs") == "other");
}
