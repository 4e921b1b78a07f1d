#include "compsplit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "compsplit/toml_lite.hpp"
#include "compsplit/util.hpp"

namespace compsplit {

namespace {

constexpr double kDistTolerance = 1e-9;

void validate_dist(const AnswerDist& dist, const std::string& where) {
  if (dist.entries.empty()) throw Error(where + ": empty answer distribution");
  double sum = 0.0;
  for (const auto& [answer, p] : dist.entries) {
    if (answer.empty()) throw Error(where + ": empty answer string");
    if (p < 0.0) throw Error(where + ": negative probability for '" + answer + "'");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistTolerance) {
    throw Error(where + ": probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

std::string extract_slot(const std::string& text) {
  std::size_t open = text.find('{');
  if (open == std::string::npos) return "";
  std::size_t close = text.find('}', open);
  if (close == std::string::npos) throw Error("template '" + text + "': unclosed '{'");
  std::string slot = text.substr(open + 1, close - open - 1);
  if (slot.empty()) throw Error("template '" + text + "': empty slot name");
  if (text.find('{', close) != std::string::npos) {
    throw Error("template '" + text + "': at most one slot is supported");
  }
  return slot;
}

std::string fill_slot(const std::string& text, const std::string& slot,
                      const std::string& value) {
  if (slot.empty()) return text;
  std::string pattern = "{" + slot + "}";
  std::string out = text;
  std::size_t pos = out.find(pattern);
  out.replace(pos, pattern.size(), value);
  return out;
}

std::size_t sample_cumulative(const std::vector<double>& cumulative, double u) {
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    if (u < cumulative[i]) return i;
  }
  return cumulative.size() - 1;
}

AnswerDist dist_from_json(const nlohmann::json& j, const std::string& where) {
  AnswerDist d;
  if (!j.is_object()) throw Error(where + ": answer distribution must be an object");
  for (const auto& [answer, p] : j.items()) {
    d.entries.emplace_back(to_lower(trim(answer)), p.get<double>());
  }
  return d;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_records < 1) throw Error("synth: n_records must be >= 1");
  if (n_human_answers < 0) throw Error("synth: n_human_answers must be >= 0");
  if (agreement < 0.0 || agreement > 1.0) throw Error("synth: agreement must be in [0,1]");
  if (templates.empty()) throw Error("synth: no templates");
  for (const SynthTemplate& t : templates) {
    if (t.weight <= 0.0) throw Error("synth: template '" + t.text + "': weight must be > 0");
    if (!t.slot.empty() && !vocab.count(t.slot)) {
      throw Error("synth: template '" + t.text + "': slot '" + t.slot + "' not in vocab");
    }
  }
  for (const auto& [slot, values] : vocab) {
    if (values.empty()) throw Error("synth: vocab slot '" + slot + "' is empty");
  }
  if (!default_answers.entries.empty()) validate_dist(default_answers, "synth default_answers");
  std::set<std::pair<std::size_t, std::string>> seen;
  for (const BiasCell& cell : bias) {
    if (cell.template_index >= templates.size()) {
      throw Error("synth: bias cell references template " +
                  std::to_string(cell.template_index) + " out of range");
    }
    const SynthTemplate& t = templates[cell.template_index];
    const std::string where =
        "synth bias (template " + std::to_string(cell.template_index) + ", object '" +
        cell.object + "')";
    if (cell.weight <= 0.0) throw Error(where + ": weight must be > 0");
    if (t.slot.empty()) {
      if (!cell.object.empty()) throw Error(where + ": template has no slot");
    } else {
      const auto& values = vocab.at(t.slot);
      if (std::find(values.begin(), values.end(), cell.object) == values.end()) {
        throw Error(where + ": object not in vocab slot '" + t.slot + "'");
      }
    }
    if (!seen.insert({cell.template_index, cell.object}).second) {
      throw Error(where + ": duplicate bias cell");
    }
    validate_dist(cell.answers, where);
  }
  // every (template, object) cell must resolve to some distribution
  for (std::size_t ti = 0; ti < templates.size(); ++ti) {
    std::vector<std::string> objects =
        templates[ti].slot.empty() ? std::vector<std::string>{""} : vocab.at(templates[ti].slot);
    for (const std::string& obj : objects) {
      if (!seen.count({ti, obj}) && default_answers.entries.empty()) {
        throw Error("synth: no answers for template " + std::to_string(ti) + ", object '" +
                    obj + "' and no default_answers");
      }
    }
  }
}

Corpus generate(const SynthConfig& cfg) {
  cfg.validate();

  // Per-template object lists and resolved cells, in deterministic order.
  struct Cell {
    std::string object;
    double weight = 1.0;
    const AnswerDist* answers = nullptr;
    std::vector<double> cum_answers;
  };
  std::vector<std::vector<Cell>> cells(cfg.templates.size());
  std::vector<std::vector<double>> cum_objects(cfg.templates.size());
  std::map<std::pair<std::size_t, std::string>, const BiasCell*> bias_by_key;
  for (const BiasCell& cell : cfg.bias) {
    bias_by_key[{cell.template_index, cell.object}] = &cell;
  }

  std::set<std::string> vocab_set;  // global answer vocabulary, sorted
  for (const BiasCell& cell : cfg.bias) {
    for (const auto& [answer, p] : cell.answers.entries) vocab_set.insert(answer);
  }
  for (const auto& [answer, p] : cfg.default_answers.entries) vocab_set.insert(answer);
  const std::vector<std::string> answer_vocab(vocab_set.begin(), vocab_set.end());

  for (std::size_t ti = 0; ti < cfg.templates.size(); ++ti) {
    std::vector<std::string> objects = cfg.templates[ti].slot.empty()
                                           ? std::vector<std::string>{""}
                                           : cfg.vocab.at(cfg.templates[ti].slot);
    double total = 0.0;
    for (const std::string& obj : objects) {
      Cell c;
      c.object = obj;
      auto it = bias_by_key.find({ti, obj});
      if (it != bias_by_key.end()) {
        c.weight = it->second->weight;
        c.answers = &it->second->answers;
      } else {
        c.answers = &cfg.default_answers;
      }
      double acc = 0.0;
      for (const auto& [answer, p] : c.answers->entries) {
        acc += p;
        c.cum_answers.push_back(acc);
      }
      total += c.weight;
      cells[ti].push_back(std::move(c));
    }
    double acc = 0.0;
    for (const Cell& c : cells[ti]) {
      acc += c.weight / total;
      cum_objects[ti].push_back(acc);
    }
  }

  std::vector<double> cum_templates;
  {
    double total = 0.0;
    for (const SynthTemplate& t : cfg.templates) total += t.weight;
    double acc = 0.0;
    for (const SynthTemplate& t : cfg.templates) {
      acc += t.weight / total;
      cum_templates.push_back(acc);
    }
  }

  const std::int64_t pool =
      cfg.image_pool > 0 ? cfg.image_pool : std::max<std::int64_t>(1, cfg.n_records / 3);
  const int gt_copies = static_cast<int>(
      std::llround(cfg.agreement * static_cast<double>(cfg.n_human_answers)));

  std::mt19937_64 gen(cfg.seed);
  Corpus corpus;
  corpus.source_label = cfg.label;
  corpus.records.reserve(static_cast<std::size_t>(cfg.n_records));
  for (std::int64_t i = 1; i <= cfg.n_records; ++i) {
    const std::size_t ti = sample_cumulative(cum_templates, uniform_unit(gen));
    const SynthTemplate& t = cfg.templates[ti];
    const Cell& cell = cells[ti][sample_cumulative(cum_objects[ti], uniform_unit(gen))];
    const std::string& gt =
        cell.answers->entries[sample_cumulative(cell.cum_answers, uniform_unit(gen))].first;

    QaRecord rec;
    rec.question_id = i;
    rec.image_id = 1 + static_cast<std::int64_t>(uniform_below(gen, static_cast<std::uint64_t>(pool)));
    rec.question_text = to_lower(fill_slot(t.text, t.slot, cell.object));
    rec.ground_truth_answer = gt;
    rec.question_type = t.question_type;
    rec.answer_type = derive_answer_type(gt);

    if (cfg.n_human_answers > 0) {
      rec.human_answers.reserve(static_cast<std::size_t>(cfg.n_human_answers));
      for (int k = 0; k < gt_copies && k < cfg.n_human_answers; ++k) {
        rec.human_answers.push_back(gt);
      }
      while (static_cast<int>(rec.human_answers.size()) < cfg.n_human_answers) {
        // noise answer drawn from the vocabulary excluding the ground truth
        if (answer_vocab.size() <= 1) {
          rec.human_answers.push_back(gt);
          continue;
        }
        std::size_t pick =
            static_cast<std::size_t>(uniform_below(gen, answer_vocab.size() - 1));
        const std::string& noise =
            answer_vocab[pick] == gt ? answer_vocab.back() : answer_vocab[pick];
        rec.human_answers.push_back(noise);
      }
      fisher_yates(rec.human_answers, gen);
    }
    corpus.records.push_back(std::move(rec));
  }
  validate_corpus(corpus);
  return corpus;
}

SynthConfig preset(const std::string& name) {
  SynthConfig cfg;
  cfg.label = "preset:" + name;
  if (name == "color-bias") {
    // Seen concepts, unseen compositions: each object has a dominant color
    // plus a low-frequency crossed pairing; two paraphrase templates
    // reduce to the same form.
    cfg.templates = {
        {"What color is the {object}?", "what color", 0.6, ""},
        {"What is the color of the {object}?", "what is the color of the", 0.4, ""},
    };
    cfg.vocab["object"] = {"plate", "cone", "apple", "stop light"};
    const std::vector<std::pair<std::string, AnswerDist>> dists = {
        {"plate", {{{"green", 0.9}, {"red", 0.1}}}},
        {"cone", {{{"orange", 0.9}, {"green", 0.1}}}},
        {"apple", {{{"green", 0.8}, {"red", 0.2}}}},
        {"stop light", {{{"red", 0.95}, {"green", 0.05}}}},
    };
    for (std::size_t ti = 0; ti < cfg.templates.size(); ++ti) {
      for (const auto& [object, dist] : dists) {
        cfg.bias.push_back({ti, object, 1.0, dist});
      }
    }
    cfg.agreement = 0.9;
    cfg.seed = 20230301;
  } else if (name == "sport-bias") {
    // The tennis/skiing flip: the dominant (question form, answer) chunks
    // land on the test side, so the train-side majority answer differs
    // from the test-side majority for the same question type.
    cfg.templates = {
        {"What sport is the {person} playing?", "what sport", 0.4, ""},
        {"What color is the {object}?", "what color", 0.3, ""},
        {"Is it {time}?", "is it", 0.2, ""},
        {"What animal is in the picture?", "what animal", 0.1, ""},
    };
    cfg.vocab["person"] = {"man", "woman"};
    cfg.vocab["object"] = {"plate", "cone"};
    cfg.vocab["time"] = {"daytime", "nighttime"};
    cfg.bias = {
        {0, "man", 0.8, {{{"tennis", 0.98}, {"skiing", 0.02}}}},
        {0, "woman", 0.2, {{{"skiing", 0.98}, {"tennis", 0.02}}}},
        {1, "plate", 0.5, {{{"green", 0.9}, {"red", 0.1}}}},
        {1, "cone", 0.5, {{{"orange", 0.9}, {"green", 0.1}}}},
        {2, "daytime", 0.5, {{{"yes", 0.8}, {"no", 0.2}}}},
        {2, "nighttime", 0.5, {{{"no", 0.8}, {"yes", 0.2}}}},
        {3, "", 1.0, {{{"dog", 0.5}, {"cat", 0.3}, {"zebra", 0.2}}}},
    };
    cfg.agreement = 0.9;
    cfg.seed = 20230302;
  } else if (name == "poisoned-type") {
    // One question type whose two answers are forced onto opposite sides
    // (or entirely into test); with full annotator agreement its
    // compositional accuracy is exactly zero under question-type keying.
    cfg.templates = {
        {"What room is this?", "what room is", 0.5, ""},
        {"What color is the {object}?", "what color", 0.3, ""},
        {"How many {animal}s are there?", "how many", 0.2, ""},
    };
    cfg.vocab["object"] = {"plate", "cone"};
    cfg.vocab["animal"] = {"dog", "cat"};
    cfg.bias = {
        {0, "", 1.0, {{{"kitchen", 0.55}, {"living room", 0.45}}}},
        {1, "plate", 0.5, {{{"green", 0.9}, {"red", 0.1}}}},
        {1, "cone", 0.5, {{{"orange", 0.9}, {"green", 0.1}}}},
        {2, "dog", 0.5, {{{"2", 0.6}, {"3", 0.4}}}},
        {2, "cat", 0.5, {{{"1", 0.5}, {"2", 0.5}}}},
    };
    cfg.agreement = 1.0;
    cfg.seed = 20230303;
  } else {
    std::string known;
    for (const std::string& p : preset_names()) {
      if (!known.empty()) known += ", ";
      known += p;
    }
    throw UsageError("unknown preset '" + name + "' (available: " + known + ")");
  }
  for (SynthTemplate& t : cfg.templates) t.slot = extract_slot(t.text);
  cfg.validate();
  return cfg;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = {"color-bias", "sport-bias", "poisoned-type"};
  return kNames;
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  if (auto it = j.find("n_records"); it != j.end()) cfg.n_records = it->get<std::int64_t>();
  if (auto it = j.find("n_human_answers"); it != j.end()) cfg.n_human_answers = it->get<int>();
  if (auto it = j.find("agreement"); it != j.end()) cfg.agreement = it->get<double>();
  if (auto it = j.find("seed"); it != j.end()) cfg.seed = it->get<std::uint64_t>();
  if (auto it = j.find("image_pool"); it != j.end()) cfg.image_pool = it->get<std::int64_t>();
  if (auto it = j.find("label"); it != j.end()) cfg.label = it->get<std::string>();

  if (auto it = j.find("templates"); it != j.end()) {
    for (const auto& t : *it) {
      SynthTemplate st;
      st.text = t.at("text").get<std::string>();
      st.question_type = to_lower(trim(t.value("question_type", "")));
      st.weight = t.value("weight", 1.0);
      st.slot = extract_slot(st.text);
      cfg.templates.push_back(std::move(st));
    }
  }
  if (auto it = j.find("vocab"); it != j.end()) {
    for (const auto& [slot, values] : it->items()) {
      std::vector<std::string> vals;
      for (const auto& v : values) vals.push_back(to_lower(trim(v.get<std::string>())));
      cfg.vocab[slot] = std::move(vals);
    }
  }
  if (auto it = j.find("bias"); it != j.end()) {
    for (const auto& b : *it) {
      BiasCell cell;
      cell.template_index = b.at("template").get<std::size_t>();
      cell.object = to_lower(trim(b.value("object", "")));
      cell.weight = b.value("weight", 1.0);
      cell.answers = dist_from_json(b.at("answers"), "bias cell");
      cfg.bias.push_back(std::move(cell));
    }
  }
  if (auto it = j.find("default_answers"); it != j.end()) {
    cfg.default_answers = dist_from_json(*it, "default_answers");
  }
  cfg.validate();
  return cfg;
}

SynthConfig load_synth_config(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0) {
    j = parse_toml_lite(text);
  } else {
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(path + ": " + e.what());
    }
  }
  try {
    return synth_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace compsplit
