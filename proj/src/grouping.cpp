#include "compsplit/grouping.hpp"

#include <algorithm>
#include <unordered_map>

#include "compsplit/util.hpp"

namespace compsplit {

bool group_key_less(const GroupKey& a, const GroupKey& b) {
  if (a.reduced.tokens != b.reduced.tokens) {
    return std::lexicographical_compare(a.reduced.tokens.begin(), a.reduced.tokens.end(),
                                        b.reduced.tokens.begin(), b.reduced.tokens.end());
  }
  return a.answer < b.answer;
}

std::vector<std::string> concepts_of(const GroupKey& key, const NormConfig& cfg) {
  std::vector<std::string> out = key.reduced.tokens;
  for (const std::string& tok : tokenize(key.answer)) {
    out.push_back(lemmatize(tok, cfg));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<QaGroup> build_groups(const Corpus& corpus, const NormConfig& cfg, int threads) {
  const std::vector<ReducedForm> reduced = reduce_corpus(corpus, cfg, threads);

  std::vector<QaGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    // '\x1f' cannot occur in tokens or trimmed answers, so the flat key is
    // injective over (token list, answer).
    std::string flat;
    for (const std::string& t : reduced[i].tokens) {
      flat += t;
      flat += '\x1f';
    }
    flat += '\x1f';
    flat += corpus.records[i].ground_truth_answer;

    auto [it, inserted] = index.emplace(std::move(flat), groups.size());
    if (inserted) {
      QaGroup g;
      g.key.reduced = reduced[i];
      g.key.answer = corpus.records[i].ground_truth_answer;
      groups.push_back(std::move(g));
    }
    groups[it->second].member_ids.push_back(corpus.records[i].question_id);
  }
  for (QaGroup& g : groups) {
    g.concepts = concepts_of(g.key, cfg);
  }
  return groups;
}

void dump_groups_jsonl(const std::vector<QaGroup>& groups, const std::string& path) {
  nlohmann::json line;
  std::string buf;
  for (const QaGroup& g : groups) {
    line = nlohmann::json{{"key_tokens", g.key.reduced.tokens},
                          {"answer", g.key.answer},
                          {"member_ids", g.member_ids},
                          {"concepts", g.concepts}};
    buf += line.dump();
    buf += '\n';
  }
  write_text_file(path, buf);
}

}  // namespace compsplit
