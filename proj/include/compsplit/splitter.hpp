#ifndef COMPSPLIT_SPLITTER_HPP
#define COMPSPLIT_SPLITTER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "compsplit/corpus.hpp"
#include "compsplit/grouping.hpp"
#include "compsplit/util.hpp"

namespace compsplit {

enum class Side { Train, Test };

enum class GroupOrder { SizeDescThenKey, KeyLex, InputOrder, Shuffled };

// "Covers majority of the concepts" is frequency-weighted by default
// (occurrence counts over test records); unique-concept counting is the
// config alternative.
enum class GainWeighting { Frequency, Unique };

// Heap: incremental gain maintenance on an indexed max-heap (default; the
// only engine that scales to corpus-sized inputs). Scan: recomputes every
// candidate gain each step — the straightforward reference; parallelized
// over groups with OpenMP when threads != 1. All engines produce identical
// assignments.
enum class GreedyEngine { Heap, Scan };

struct SplitConfig {
  Fraction target_test_fraction{1, 3};
  GroupOrder group_order = GroupOrder::SizeDescThenKey;
  GainWeighting weighting = GainWeighting::Frequency;
  GreedyEngine engine = GreedyEngine::Heap;
  std::uint64_t seed = 0;  // Shuffled order only
  int threads = 0;         // Scan engine only; never affects results
};

struct IterationEntry {
  std::int64_t step = 0;
  std::size_t group_index = 0;  // into the input groups vector
  Side side = Side::Train;
  // Test side: uncovered mass folded in by this group. Train side: the
  // gain that won the argmax (0 once the quota is met).
  std::int64_t uncovered_weight_gain = 0;
};

struct SplitAssignment {
  std::vector<Side> side_by_group;  // total map: input group index -> side
  std::vector<IterationEntry> iteration_log;
  // Test-concept occurrence counts never covered by train; count desc, name asc.
  std::vector<std::pair<std::string, std::int64_t>> uncovered_final;
};

// The greedy re-splitting loop:
//   1. order groups per cfg.group_order;
//   2. while the test side is under quota, assign the next unassigned
//      group in order to Test and fold its concept occurrences
//      (|member_ids| per concept) into the uncovered multiset, skipping
//      concepts already covered by Train;
//   3. after each test addition, assign to Train the unassigned group with
//      maximal uncovered gain (ties: larger group, then lexicographically
//      smaller key), removing its concepts from the uncovered multiset;
//   4. once the quota is met, all remaining groups go to Train (their
//      concepts count as covered).
// Deterministic given (groups, cfg); no group ever lands on both sides.
SplitAssignment greedy_split(const std::vector<QaGroup>& groups, const SplitConfig& cfg);

// Seeded-shuffle control: first ceil(fraction*n) shuffled records are held
// out as the test side. Deterministic per seed.
SplitOutput random_split(const Corpus& corpus, const Fraction& fraction, std::uint64_t seed);

// Expands an assignment to record-level corpora and fills manifest counts
// and the iteration-log digest. Images may legitimately appear on both
// sides. Coverage fields and the config echo are the caller's to fill.
SplitOutput materialize(const SplitAssignment& assignment, const std::vector<QaGroup>& groups,
                        const Corpus& corpus);

std::string iteration_log_digest(const SplitAssignment& assignment,
                                 const std::vector<QaGroup>& groups);

void dump_iteration_log_jsonl(const SplitAssignment& assignment,
                              const std::vector<QaGroup>& groups, const std::string& path);

const char* to_string(Side side);
const char* to_string(GroupOrder order);
const char* to_string(GainWeighting weighting);
const char* to_string(GreedyEngine engine);

}  // namespace compsplit

#endif
