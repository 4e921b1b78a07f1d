#include "compsplit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "compsplit/util.hpp"

namespace compsplit {

namespace {

using nlohmann::json;

std::string norm_str(const json& j) { return to_lower(trim(j.get<std::string>())); }

json parse_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

const json& require_field(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) throw Error(where + ": missing field '" + field + "'");
  return *it;
}

std::string json_str(const std::string& s) { return json(s).dump(); }

void sort_and_validate(Corpus& corpus) {
  std::sort(corpus.records.begin(), corpus.records.end(),
            [](const QaRecord& a, const QaRecord& b) { return a.question_id < b.question_id; });
  validate_corpus(corpus);
}

}  // namespace

void validate_corpus(const Corpus& corpus) {
  std::int64_t prev = 0;
  bool first = true;
  for (const QaRecord& r : corpus.records) {
    if (!first && r.question_id <= prev) {
      throw Error("corpus: duplicate or out-of-order question_id " +
                  std::to_string(r.question_id));
    }
    if (r.ground_truth_answer.empty()) {
      throw Error("corpus: empty ground_truth_answer for question_id " +
                  std::to_string(r.question_id));
    }
    prev = r.question_id;
    first = false;
  }
}

SideCounts count_side(const Corpus& corpus) {
  SideCounts c;
  std::unordered_set<std::int64_t> images;
  for (const QaRecord& r : corpus.records) {
    ++c.questions;
    c.answers += static_cast<std::int64_t>(r.human_answers.size());
    images.insert(r.image_id);
  }
  c.images = static_cast<std::int64_t>(images.size());
  return c;
}

std::string derive_answer_type(const std::string& answer) {
  if (answer == "yes" || answer == "no") return "yes/no";
  bool digit = false;
  int dots = 0;
  for (unsigned char c : answer) {
    if (std::isdigit(c)) {
      digit = true;
    } else if (c == '.') {
      if (++dots > 1) return "other";
    } else {
      return "other";
    }
  }
  return digit ? "number" : "other";
}

Corpus load_vqa(const std::string& questions_path, const std::string& annotations_path) {
  const json qdoc = parse_json_file(questions_path);
  const json adoc = parse_json_file(annotations_path);
  const json& questions = require_field(qdoc, "questions", questions_path);
  const json& annotations = require_field(adoc, "annotations", annotations_path);
  if (!questions.is_array()) throw Error(questions_path + ": 'questions' is not an array");
  if (!annotations.is_array()) throw Error(annotations_path + ": 'annotations' is not an array");

  std::unordered_map<std::int64_t, const json*> ann_by_id;
  ann_by_id.reserve(annotations.size());
  for (const json& a : annotations) {
    std::int64_t id = require_field(a, "question_id", annotations_path).get<std::int64_t>();
    if (!ann_by_id.emplace(id, &a).second) {
      throw Error(annotations_path + ": duplicate question_id " + std::to_string(id));
    }
  }

  Corpus corpus;
  corpus.source_label = questions_path;
  corpus.records.reserve(questions.size());
  std::unordered_set<std::int64_t> seen;
  seen.reserve(questions.size());
  for (const json& q : questions) {
    QaRecord rec;
    rec.question_id = require_field(q, "question_id", questions_path).get<std::int64_t>();
    if (!seen.insert(rec.question_id).second) {
      throw Error(questions_path + ": duplicate question_id " + std::to_string(rec.question_id));
    }
    rec.image_id = require_field(q, "image_id", questions_path).get<std::int64_t>();
    rec.question_text = norm_str(require_field(q, "question", questions_path));

    auto it = ann_by_id.find(rec.question_id);
    if (it == ann_by_id.end()) {
      throw Error("join error: question_id " + std::to_string(rec.question_id) +
                  " missing from annotations");
    }
    const json& a = *it->second;
    ann_by_id.erase(it);
    rec.ground_truth_answer =
        norm_str(require_field(a, "multiple_choice_answer", annotations_path));
    if (rec.ground_truth_answer.empty()) {
      throw Error(annotations_path + ": empty multiple_choice_answer for question_id " +
                  std::to_string(rec.question_id));
    }
    if (auto ans = a.find("answers"); ans != a.end()) {
      for (const json& h : *ans) {
        rec.human_answers.push_back(norm_str(require_field(h, "answer", annotations_path)));
      }
    }
    if (auto qt = a.find("question_type"); qt != a.end() && qt->is_string()) {
      rec.question_type = norm_str(*qt);
    }
    if (auto at = a.find("answer_type"); at != a.end() && at->is_string()) {
      rec.answer_type = norm_str(*at);
    }
    corpus.records.push_back(std::move(rec));
  }
  if (!ann_by_id.empty()) {
    std::int64_t orphan = ann_by_id.begin()->first;
    for (const auto& [id, ptr] : ann_by_id) orphan = std::min(orphan, id);
    throw Error("join error: question_id " + std::to_string(orphan) +
                " missing from questions");
  }
  sort_and_validate(corpus);
  return corpus;
}

Corpus load_jsonl(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  Corpus corpus;
  corpus.source_label = path;
  std::string line;
  int lineno = 0;
  std::unordered_set<std::int64_t> seen;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = path + " line " + std::to_string(lineno);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(where + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    QaRecord rec;
    rec.question_id = require_field(obj, "id", where).get<std::int64_t>();
    if (!seen.insert(rec.question_id).second) {
      throw Error(where + ": duplicate id " + std::to_string(rec.question_id));
    }
    rec.question_text = norm_str(require_field(obj, "question", where));
    rec.ground_truth_answer = norm_str(require_field(obj, "answer", where));
    if (rec.ground_truth_answer.empty()) throw Error(where + ": empty answer");
    if (auto it = obj.find("image_id"); it != obj.end()) {
      rec.image_id = it->get<std::int64_t>();
    }
    if (auto it = obj.find("answers"); it != obj.end()) {
      for (const json& h : *it) rec.human_answers.push_back(to_lower(trim(h.get<std::string>())));
    }
    if (auto it = obj.find("question_type"); it != obj.end() && it->is_string()) {
      rec.question_type = norm_str(*it);
    }
    if (auto it = obj.find("answer_type"); it != obj.end() && it->is_string()) {
      rec.answer_type = norm_str(*it);
    }
    corpus.records.push_back(std::move(rec));
  }
  sort_and_validate(corpus);
  return corpus;
}

void write_vqa(const Corpus& corpus, const std::string& questions_path,
               const std::string& annotations_path) {
  std::string qbuf = "{\"questions\":[";
  std::string abuf = "{\"annotations\":[";
  bool first = true;
  for (const QaRecord& r : corpus.records) {
    if (!first) {
      qbuf += ',';
      abuf += ',';
    }
    first = false;
    qbuf += "{\"image_id\":" + std::to_string(r.image_id);
    qbuf += ",\"question\":" + json_str(r.question_text);
    qbuf += ",\"question_id\":" + std::to_string(r.question_id) + "}";

    abuf += "{\"answer_type\":" + json_str(r.answer_type);
    abuf += ",\"answers\":[";
    for (std::size_t i = 0; i < r.human_answers.size(); ++i) {
      if (i) abuf += ',';
      abuf += "{\"answer\":" + json_str(r.human_answers[i]) + "}";
    }
    abuf += "],\"image_id\":" + std::to_string(r.image_id);
    abuf += ",\"multiple_choice_answer\":" + json_str(r.ground_truth_answer);
    abuf += ",\"question_id\":" + std::to_string(r.question_id);
    abuf += ",\"question_type\":" + json_str(r.question_type) + "}";
  }
  qbuf += "]}\n";
  abuf += "]}\n";
  write_text_file(questions_path, qbuf);
  write_text_file(annotations_path, abuf);
}

void write_jsonl(const Corpus& corpus, const std::string& path) {
  std::string buf;
  for (const QaRecord& r : corpus.records) {
    buf += "{\"answer\":" + json_str(r.ground_truth_answer);
    if (!r.answer_type.empty()) buf += ",\"answer_type\":" + json_str(r.answer_type);
    if (!r.human_answers.empty()) {
      buf += ",\"answers\":[";
      for (std::size_t i = 0; i < r.human_answers.size(); ++i) {
        if (i) buf += ',';
        buf += json_str(r.human_answers[i]);
      }
      buf += ']';
    }
    buf += ",\"id\":" + std::to_string(r.question_id);
    buf += ",\"image_id\":" + std::to_string(r.image_id);
    buf += ",\"question\":" + json_str(r.question_text);
    if (!r.question_type.empty()) buf += ",\"question_type\":" + json_str(r.question_type);
    buf += "}\n";
  }
  write_text_file(path, buf);
}

nlohmann::json SplitManifest::to_json() const {
  json j;
  j["config"] = config_echo;
  j["counts"] = {
      {"train",
       {{"questions", train.questions}, {"images", train.images}, {"answers", train.answers}}},
      {"test",
       {{"questions", test.questions}, {"images", test.images}, {"answers", test.answers}}},
  };
  if (unique_coverage && weighted_coverage) {
    j["coverage"] = {{"unique", *unique_coverage}, {"weighted", *weighted_coverage}};
  }
  j["iteration_log_digest"] = iteration_log_digest;
  return j;
}

void export_split(const SplitOutput& split, const std::string& out_dir, CorpusFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create directory " + out_dir + ": " + ec.message());
  if (format == CorpusFormat::Vqa) {
    write_vqa(split.train, out_dir + "/train_questions.json", out_dir + "/train_annotations.json");
    write_vqa(split.test, out_dir + "/test_questions.json", out_dir + "/test_annotations.json");
  } else {
    write_jsonl(split.train, out_dir + "/train.jsonl");
    write_jsonl(split.test, out_dir + "/test.jsonl");
  }
  write_text_file(out_dir + "/manifest.json", split.manifest.to_json().dump(2) + "\n");
}

Corpus load_corpus(CorpusFormat format, const std::vector<std::string>& paths) {
  if (format == CorpusFormat::Vqa) {
    if (paths.size() != 2) throw UsageError("vqa format needs questions and annotations paths");
    return load_vqa(paths[0], paths[1]);
  }
  if (paths.size() != 1) throw UsageError("jsonl format needs exactly one path");
  return load_jsonl(paths[0]);
}

}  // namespace compsplit
