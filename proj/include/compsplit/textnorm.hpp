#ifndef COMPSPLIT_TEXTNORM_HPP
#define COMPSPLIT_TEXTNORM_HPP

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace compsplit {

struct Corpus;

// Ordered list of lowercase lemmatized content words left after stopword
// removal. Two questions with equal ReducedForm and equal ground-truth
// answer belong to the same group.
struct ReducedForm {
  std::vector<std::string> tokens;

  bool operator==(const ReducedForm& other) const { return tokens == other.tokens; }
  std::string joined() const;  // tokens joined with single spaces
};

// One rewrite rule of the rule-based lemmatizer. Rules are tried in order
// on all-alphabetic tokens and re-applied until none fires.
struct SuffixRule {
  std::string suffix;
  std::string replacement;
  std::size_t min_len = 0;
  std::vector<std::string> blocked_endings;  // token endings that veto the rule
  bool undouble = false;         // collapse bb dd gg mm nn pp rr tt after rewrite
  bool need_stem_vowel = false;  // stem must contain a vowel (y counts)
  bool stem_not_single_s = false;
};

struct NormConfig {
  std::unordered_set<std::string> stopword_list;
  std::unordered_map<std::string, std::string> lemma_exceptions;
  std::vector<SuffixRule> suffix_rules;

  // Frozen built-in resources (same content as resources/*.txt|tsv).
  static NormConfig defaults();
  // Plain-text resources: one stopword per line; "form<TAB>lemma" per line
  // for exceptions. Lines starting with '#' and blank lines are ignored.
  static NormConfig from_files(const std::string& stopwords_path,
                               const std::string& exceptions_path);
  // Directory holding stopwords.txt and lemma_exceptions.tsv.
  static NormConfig from_dir(const std::string& dir);

  // Enforces: wh-words never stopworded; every exception lemma is a fixed
  // point of lemmatize. Throws Error on violation.
  void validate() const;

  // Stable hash of the active resources, echoed into split manifests.
  std::string resource_digest() const;
};

// Lowercases, splits on whitespace, strips leading/trailing ASCII
// punctuation from each token, drops empty tokens. Internal punctuation
// (apostrophes, colons, periods, hyphens) is preserved.
std::vector<std::string> tokenize(std::string_view text);

// Exception table first, then suffix rules to a fixed point.
// Idempotent: lemmatize(lemmatize(t)) == lemmatize(t).
std::string lemmatize(const std::string& token, const NormConfig& cfg);

// tokenize -> drop stopwords -> lemmatize survivors (order preserved).
// The stopword filter is re-applied after lemmatization so that no output
// token is ever a stopword.
ReducedForm reduce(std::string_view question, const NormConfig& cfg);

// Per-record reduction over a whole corpus. reduce_corpus runs the OpenMP
// kernel (threads <= 0 picks the OpenMP default); reduce_corpus_serial is
// the plain loop kept as the reference. Both return identical output.
std::vector<ReducedForm> reduce_corpus(const Corpus& corpus, const NormConfig& cfg,
                                       int threads = 0);
std::vector<ReducedForm> reduce_corpus_serial(const Corpus& corpus, const NormConfig& cfg);

}  // namespace compsplit

#endif
