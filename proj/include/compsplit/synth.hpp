#ifndef COMPSPLIT_SYNTH_HPP
#define COMPSPLIT_SYNTH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "compsplit/corpus.hpp"

namespace compsplit {

// Discrete answer distribution in declaration order; probabilities must
// sum to 1 within 1e-9.
struct AnswerDist {
  std::vector<std::pair<std::string, double>> entries;
};

struct SynthTemplate {
  std::string text;  // at most one {slot}
  std::string question_type;
  double weight = 1.0;
  std::string slot;  // derived from text; empty for slotless templates
};

// One (template, object) cell of the bias table: relative weight of the
// object under its template plus the skewed answer distribution.
struct BiasCell {
  std::size_t template_index = 0;
  std::string object;  // "" for slotless templates
  double weight = 1.0;
  AnswerDist answers;
};

struct SynthConfig {
  std::vector<SynthTemplate> templates;
  std::map<std::string, std::vector<std::string>> vocab;  // slot -> values
  std::vector<BiasCell> bias;
  AnswerDist default_answers;  // used for (template, object) cells not in bias
  std::int64_t n_records = 1;
  int n_human_answers = 10;
  double agreement = 0.9;  // fraction of human answers matching ground truth
  std::uint64_t seed = 1;
  std::int64_t image_pool = 0;  // 0 -> max(1, n_records/3)
  std::string label = "synth";

  void validate() const;  // throws Error on bad distributions etc.
};

// Deterministic per (cfg, seed): question_ids 1..n, image ids drawn from
// the pool, human answers = round(agreement*n_human_answers) ground-truth
// copies plus noise drawn from the answer vocabulary excluding the ground
// truth, shuffled.
Corpus generate(const SynthConfig& cfg);

// Frozen presets: "color-bias", "sport-bias", "poisoned-type".
SynthConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

SynthConfig synth_config_from_json(const nlohmann::json& j);
// Reads .json, or .toml via the built-in subset reader.
SynthConfig load_synth_config(const std::string& path);

}  // namespace compsplit

#endif
