#ifndef COMPSPLIT_GROUPING_HPP
#define COMPSPLIT_GROUPING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "compsplit/corpus.hpp"
#include "compsplit/textnorm.hpp"

namespace compsplit {

// Equality is element-wise on reduced tokens plus exact answer match.
struct GroupKey {
  ReducedForm reduced;
  std::string answer;

  bool operator==(const GroupKey& other) const {
    return answer == other.answer && reduced == other.reduced;
  }
};

// Lexicographic order: token lists element-wise, then the answer string.
bool group_key_less(const GroupKey& a, const GroupKey& b);

// All records sharing one (ReducedForm, ground-truth answer) key. The
// atomic unit of split assignment.
struct QaGroup {
  GroupKey key;
  std::vector<std::int64_t> member_ids;  // ascending question_ids
  std::vector<std::string> concepts;     // sorted unique

  std::int64_t size() const { return static_cast<std::int64_t>(member_ids.size()); }
};

// Unique words of the reduced question plus the tokenized+lemmatized
// ground-truth answer. Answers are NOT stopword-filtered ("yes"/"no" must
// survive as concepts).
std::vector<std::string> concepts_of(const GroupKey& key, const NormConfig& cfg);

// Partitions the corpus into groups. Returned in first-appearance order
// (ascending smallest member question_id), independent of the parallelism
// of the reduction pass. Every record lands in exactly one group.
std::vector<QaGroup> build_groups(const Corpus& corpus, const NormConfig& cfg,
                                  int threads = 0);

// Audit dump: one {key_tokens, answer, member_ids, concepts} object per line.
void dump_groups_jsonl(const std::vector<QaGroup>& groups, const std::string& path);

}  // namespace compsplit

#endif
