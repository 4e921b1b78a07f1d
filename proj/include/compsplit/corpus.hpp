#ifndef COMPSPLIT_CORPUS_HPP
#define COMPSPLIT_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace compsplit {

// One (question, image, answers) datum joined from the questions and
// annotations files. All strings are lowercased and trimmed at load time;
// grouping must not be case or EOL sensitive.
struct QaRecord {
  std::int64_t question_id = 0;
  std::int64_t image_id = 0;
  std::string question_text;
  std::string ground_truth_answer;          // consensus answer, non-empty
  std::vector<std::string> human_answers;   // typically 10; may be empty
  std::string question_type;                // empty = absent
  std::string answer_type;                  // "yes/no" | "number" | "other" | empty
};

struct Corpus {
  std::vector<QaRecord> records;  // ascending question_id
  std::string source_label;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct SideCounts {
  std::int64_t questions = 0;
  std::int64_t images = 0;   // distinct image_ids
  std::int64_t answers = 0;  // total human answers
};

struct SplitManifest {
  SideCounts train;
  SideCounts test;
  nlohmann::json config_echo = nlohmann::json::object();
  std::optional<double> unique_coverage;
  std::optional<double> weighted_coverage;
  std::string iteration_log_digest;

  nlohmann::json to_json() const;
};

struct SplitOutput {
  Corpus train;
  Corpus test;
  SplitManifest manifest;
};

enum class CorpusFormat { Vqa, Jsonl };

// Throws Error when ids repeat, order is not ascending, or a ground-truth
// answer is empty.
void validate_corpus(const Corpus& corpus);

SideCounts count_side(const Corpus& corpus);

// "yes/no" for yes|no, "number" for numeric literals, else "other".
std::string derive_answer_type(const std::string& answer);

// VQA-style JSON ingestion: joins the `questions` and `annotations` arrays
// on question_id (every question must match exactly one annotation), sorts
// by question_id, lowercases and trims all strings.
Corpus load_vqa(const std::string& questions_path, const std::string& annotations_path);

// One JSON object per line: id, question, answer required; image_id,
// answers, question_type, answer_type optional. CRLF input is equivalent
// to LF input.
Corpus load_jsonl(const std::string& path);

void write_vqa(const Corpus& corpus, const std::string& questions_path,
               const std::string& annotations_path);
void write_jsonl(const Corpus& corpus, const std::string& path);

// Writes train/test corpora in the requested format plus manifest.json
// into out_dir (created if needed). Re-loading the exported files
// reproduces the corpora exactly.
void export_split(const SplitOutput& split, const std::string& out_dir,
                  CorpusFormat format = CorpusFormat::Vqa);

Corpus load_corpus(CorpusFormat format, const std::vector<std::string>& paths);

}  // namespace compsplit

#endif
