#include "compsplit/textnorm.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "compsplit/corpus.hpp"
#include "compsplit/util.hpp"
#include "norm_defaults.hpp"

namespace compsplit {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }

bool is_all_alpha(const std::string& t) {
  for (unsigned char c : t) {
    if (c >= 128 || !std::isalpha(c)) return false;
  }
  return !t.empty();
}

bool has_vowel(std::string_view s) {
  for (char c : s) {
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y') return true;
  }
  return false;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool undoublable(char c) {
  switch (c) {
    case 'b': case 'd': case 'g': case 'm':
    case 'n': case 'p': case 'r': case 't':
      return true;
    default:
      return false;
  }
}

std::vector<SuffixRule> default_suffix_rules() {
  return {
      {"ies", "y", 5, {}, false, false, false},
      {"ies", "ie", 4, {}, false, false, false},
      {"sses", "ss", 5, {}, false, false, false},
      {"xes", "x", 5, {}, false, false, false},
      {"ches", "ch", 6, {}, false, false, false},
      {"shes", "sh", 6, {}, false, false, false},
      {"oes", "o", 6, {}, false, false, false},
      {"s", "", 4, {"ss", "us", "is"}, false, false, false},
      {"ied", "y", 5, {}, false, false, false},
      {"ing", "", 6, {}, true, true, true},
      {"ed", "", 5, {"eed"}, true, true, true},
  };
}

// One rewrite pass; returns false when no rule fires.
bool apply_one_rule(std::string& t, const std::vector<SuffixRule>& rules) {
  for (const SuffixRule& r : rules) {
    if (t.size() < r.min_len || !ends_with(t, r.suffix)) continue;
    bool blocked = false;
    for (const std::string& end : r.blocked_endings) {
      if (ends_with(t, end)) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    std::string stem = t.substr(0, t.size() - r.suffix.size());
    if (r.need_stem_vowel && !has_vowel(stem)) continue;
    if (r.stem_not_single_s && ends_with(stem, "s") && !ends_with(stem, "ss")) continue;
    stem += r.replacement;
    if (r.undouble && stem.size() >= 4 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
        undoublable(stem.back())) {
      stem.pop_back();
    }
    t = std::move(stem);
    return true;
  }
  return false;
}

void parse_stopword_text(std::string_view text, std::unordered_set<std::string>& out) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    std::string word = trim(line);
    if (word.empty() || word[0] == '#') continue;
    out.insert(to_lower(word));
  }
}

void parse_exception_text(std::string_view text,
                          std::unordered_map<std::string, std::string>& out) {
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#') continue;
    std::size_t tab = entry.find('\t');
    if (tab == std::string::npos) {
      throw Error("lemma exceptions line " + std::to_string(lineno) +
                  ": expected 'form<TAB>lemma'");
    }
    std::string form = to_lower(trim(entry.substr(0, tab)));
    std::string lemma = to_lower(trim(entry.substr(tab + 1)));
    if (form.empty() || lemma.empty()) {
      throw Error("lemma exceptions line " + std::to_string(lineno) + ": empty form or lemma");
    }
    out[form] = lemma;
  }
}

const std::array<const char*, 9> kWhWords = {
    "what", "who", "where", "why", "how", "which", "when", "whose", "whom"};

}  // namespace

std::string ReducedForm::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

NormConfig NormConfig::defaults() {
  NormConfig cfg;
  parse_stopword_text(kDefaultStopwordsText, cfg.stopword_list);
  parse_exception_text(kDefaultLemmaExceptionsText, cfg.lemma_exceptions);
  cfg.suffix_rules = default_suffix_rules();
  cfg.validate();
  return cfg;
}

NormConfig NormConfig::from_files(const std::string& stopwords_path,
                                  const std::string& exceptions_path) {
  NormConfig cfg;
  parse_stopword_text(read_text_file(stopwords_path), cfg.stopword_list);
  parse_exception_text(read_text_file(exceptions_path), cfg.lemma_exceptions);
  cfg.suffix_rules = default_suffix_rules();
  cfg.validate();
  return cfg;
}

NormConfig NormConfig::from_dir(const std::string& dir) {
  return from_files(dir + "/stopwords.txt", dir + "/lemma_exceptions.tsv");
}

void NormConfig::validate() const {
  for (const char* wh : kWhWords) {
    if (stopword_list.count(wh)) {
      throw Error(std::string("stopword list must not contain wh-word '") + wh + "'");
    }
  }
  for (const auto& [form, lemma] : lemma_exceptions) {
    if (form == lemma) continue;
    if (lemmatize(lemma, *this) != lemma) {
      throw Error("lemma exception '" + form + "' -> '" + lemma +
                  "': lemma is not a fixed point of the lemmatizer");
    }
  }
}

std::string NormConfig::resource_digest() const {
  std::vector<std::string> entries;
  entries.reserve(stopword_list.size() + lemma_exceptions.size() + suffix_rules.size());
  for (const auto& w : stopword_list) entries.push_back("s:" + w);
  for (const auto& [k, v] : lemma_exceptions) entries.push_back("e:" + k + "\t" + v);
  for (const auto& r : suffix_rules) {
    entries.push_back("r:" + r.suffix + ">" + r.replacement + ":" + std::to_string(r.min_len));
  }
  std::sort(entries.begin(), entries.end());
  Fnv1a h;
  for (const auto& e : entries) {
    h.update(e);
    h.update("\n");
  }
  return h.hex();
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) continue;
    std::size_t b = start;
    std::size_t e = i;
    while (b < e && is_ascii_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_ascii_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b == e) continue;
    out.push_back(to_lower(text.substr(b, e - b)));
  }
  return out;
}

std::string lemmatize(const std::string& token, const NormConfig& cfg) {
  std::string cur = token;
  for (;;) {
    auto it = cfg.lemma_exceptions.find(cur);
    if (it != cfg.lemma_exceptions.end()) return it->second;
    if (cur.size() <= 3 || !is_all_alpha(cur)) return cur;
    if (!apply_one_rule(cur, cfg.suffix_rules)) return cur;
  }
}

ReducedForm reduce(std::string_view question, const NormConfig& cfg) {
  ReducedForm out;
  for (const std::string& tok : tokenize(question)) {
    if (cfg.stopword_list.count(tok)) continue;
    std::string lemma = lemmatize(tok, cfg);
    if (cfg.stopword_list.count(lemma)) continue;
    out.tokens.push_back(std::move(lemma));
  }
  return out;
}

std::vector<ReducedForm> reduce_corpus_serial(const Corpus& corpus, const NormConfig& cfg) {
  std::vector<ReducedForm> out(corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    out[i] = reduce(corpus.records[i].question_text, cfg);
  }
  return out;
}

std::vector<ReducedForm> reduce_corpus(const Corpus& corpus, const NormConfig& cfg,
                                       int threads) {
  std::vector<ReducedForm> out(corpus.records.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(corpus.records.size());
#ifdef _OPENMP
  if (threads > 0) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          reduce(corpus.records[static_cast<std::size_t>(i)].question_text, cfg);
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          reduce(corpus.records[static_cast<std::size_t>(i)].question_text, cfg);
    }
  }
#else
  (void)threads;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        reduce(corpus.records[static_cast<std::size_t>(i)].question_text, cfg);
  }
#endif
  return out;
}

}  // namespace compsplit
