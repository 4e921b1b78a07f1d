#include "compsplit/splitter.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace compsplit {

namespace {

struct Prepared {
  std::vector<std::size_t> order;             // iteration order (group indices)
  std::vector<std::vector<std::uint32_t>> cids;  // deduped concept ids per group
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> key_rank;         // rank in lexicographic key order
  std::vector<std::string> concept_names;
  std::vector<std::vector<std::uint32_t>> inv;  // concept id -> groups containing it
  std::int64_t total_questions = 0;
};

Prepared prepare(const std::vector<QaGroup>& groups, const SplitConfig& cfg) {
  Prepared p;
  const std::size_t n = groups.size();

  p.sizes.resize(n);
  for (std::size_t g = 0; g < n; ++g) {
    p.sizes[g] = groups[g].size();
    p.total_questions += p.sizes[g];
  }

  std::vector<std::size_t> by_key(n);
  std::iota(by_key.begin(), by_key.end(), 0);
  std::sort(by_key.begin(), by_key.end(), [&](std::size_t a, std::size_t b) {
    return group_key_less(groups[a].key, groups[b].key);
  });
  p.key_rank.resize(n);
  for (std::size_t r = 0; r < n; ++r) p.key_rank[by_key[r]] = static_cast<std::int64_t>(r);

  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), 0);
  switch (cfg.group_order) {
    case GroupOrder::SizeDescThenKey:
      std::sort(p.order.begin(), p.order.end(), [&](std::size_t a, std::size_t b) {
        if (p.sizes[a] != p.sizes[b]) return p.sizes[a] > p.sizes[b];
        return p.key_rank[a] < p.key_rank[b];
      });
      break;
    case GroupOrder::KeyLex:
      p.order = by_key;
      break;
    case GroupOrder::InputOrder:
      break;
    case GroupOrder::Shuffled: {
      std::mt19937_64 gen(cfg.seed);
      fisher_yates(p.order, gen);
      break;
    }
  }

  std::unordered_map<std::string, std::uint32_t> intern;
  p.cids.resize(n);
  for (std::size_t g = 0; g < n; ++g) {
    p.cids[g].reserve(groups[g].concepts.size());
    for (const std::string& c : groups[g].concepts) {
      auto [it, inserted] =
          intern.emplace(c, static_cast<std::uint32_t>(p.concept_names.size()));
      if (inserted) p.concept_names.push_back(c);
      p.cids[g].push_back(it->second);
    }
  }
  p.inv.resize(p.concept_names.size());
  for (std::size_t g = 0; g < n; ++g) {
    for (std::uint32_t c : p.cids[g]) p.inv[c].push_back(static_cast<std::uint32_t>(g));
  }
  return p;
}

// Indexed binary max-heap over group ids keyed by (gain desc, size desc,
// key_rank asc). No duplicate entries; updates sift in place, so memory
// stays O(groups) no matter how many gain updates the run produces.
class CandidateHeap {
 public:
  CandidateHeap(const std::vector<std::int64_t>& gain, const Prepared& p)
      : gain_(gain), sizes_(p.sizes), key_rank_(p.key_rank) {}

  void fill(std::size_t n) {
    heap_.resize(n);
    pos_.assign(n, kAbsent);
    for (std::uint32_t g = 0; g < n; ++g) {
      heap_[g] = g;
      pos_[g] = g;
    }
    for (std::size_t i = n; i-- > 0;) sift_down(i);
  }

  bool empty() const { return heap_.empty(); }

  std::uint32_t top() const { return heap_.front(); }

  void remove(std::uint32_t g) {
    std::size_t i = pos_[g];
    if (i == kAbsent) return;
    pos_[g] = kAbsent;
    std::uint32_t last = heap_.back();
    heap_.pop_back();
    if (i == heap_.size()) return;
    heap_[i] = last;
    pos_[last] = i;
    if (!sift_up(i)) sift_down(i);
  }

  void update(std::uint32_t g) {
    std::size_t i = pos_[g];
    if (i == kAbsent) return;
    if (!sift_up(i)) sift_down(i);
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

  // true when a is a strictly better candidate than b
  bool better(std::uint32_t a, std::uint32_t b) const {
    if (gain_[a] != gain_[b]) return gain_[a] > gain_[b];
    if (sizes_[a] != sizes_[b]) return sizes_[a] > sizes_[b];
    return key_rank_[a] < key_rank_[b];
  }

  bool sift_up(std::size_t i) {
    bool moved = false;
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!better(heap_[i], heap_[parent])) break;
      std::swap(heap_[i], heap_[parent]);
      pos_[heap_[i]] = i;
      pos_[heap_[parent]] = parent;
      i = parent;
      moved = true;
    }
    return moved;
  }

  void sift_down(std::size_t i) {
    for (;;) {
      std::size_t l = 2 * i + 1;
      std::size_t r = l + 1;
      std::size_t best = i;
      if (l < heap_.size() && better(heap_[l], heap_[best])) best = l;
      if (r < heap_.size() && better(heap_[r], heap_[best])) best = r;
      if (best == i) return;
      std::swap(heap_[i], heap_[best]);
      pos_[heap_[i]] = i;
      pos_[heap_[best]] = best;
      i = best;
    }
  }

  const std::vector<std::int64_t>& gain_;
  const std::vector<std::int64_t>& sizes_;
  const std::vector<std::int64_t>& key_rank_;
  std::vector<std::uint32_t> heap_;
  std::vector<std::size_t> pos_;
};

class GreedyRun {
 public:
  GreedyRun(const std::vector<QaGroup>& groups, const SplitConfig& cfg)
      : groups_(groups), cfg_(cfg), p_(prepare(groups, cfg)) {
    const std::size_t n = groups.size();
    assigned_.assign(n, 0);
    side_.assign(n, Side::Train);
    uncovered_.assign(p_.concept_names.size(), 0);
    covered_.assign(p_.concept_names.size(), 0);
    gain_.assign(n, 0);
  }

  SplitAssignment run() {
    const std::size_t n = groups_.size();
    const bool use_heap = cfg_.engine == GreedyEngine::Heap;
    CandidateHeap heap(gain_, p_);
    if (use_heap && n > 0) heap.fill(n);

    SplitAssignment out;
    out.side_by_group.assign(n, Side::Train);
    std::size_t cursor = 0;  // next candidate position in p_.order
    std::size_t n_assigned = 0;
    std::int64_t test_questions = 0;
    std::int64_t step = 0;
    const Fraction f = cfg_.target_test_fraction;

    while (n_assigned < n) {
      if (test_questions * f.den >= f.num * p_.total_questions) {
        // quota met: everything left goes to Train, concepts covered
        for (std::size_t i = cursor; i < p_.order.size(); ++i) {
          std::size_t g = p_.order[i];
          if (assigned_[g]) continue;
          std::int64_t gain = current_gain(static_cast<std::uint32_t>(g));
          assign(g, Side::Train, &out, step++, gain);
          ++n_assigned;
          cover(static_cast<std::uint32_t>(g), use_heap ? &heap : nullptr);
          if (use_heap) heap.remove(static_cast<std::uint32_t>(g));
        }
        break;
      }

      while (assigned_[p_.order[cursor]]) ++cursor;
      const std::size_t test_g = p_.order[cursor];
      std::int64_t folded = fold(static_cast<std::uint32_t>(test_g), use_heap ? &heap : nullptr);
      assign(test_g, Side::Test, &out, step++, folded);
      ++n_assigned;
      test_questions += p_.sizes[test_g];
      if (use_heap) heap.remove(static_cast<std::uint32_t>(test_g));

      if (n_assigned == n) break;

      std::uint32_t pick = use_heap ? heap.top() : scan_best();
      assign(pick, Side::Train, &out, step++, gain_horizon(pick, use_heap));
      ++n_assigned;
      cover(pick, use_heap ? &heap : nullptr);
      if (use_heap) heap.remove(pick);
    }

    finalize_uncovered(&out);
    return out;
  }

 private:
  std::int64_t gain_horizon(std::uint32_t g, bool use_heap) const {
    return use_heap ? gain_[g] : current_gain(g);
  }

  std::int64_t current_gain(std::uint32_t g) const {
    std::int64_t total = 0;
    if (cfg_.weighting == GainWeighting::Frequency) {
      for (std::uint32_t c : p_.cids[g]) total += uncovered_[c];
    } else {
      for (std::uint32_t c : p_.cids[g]) total += uncovered_[c] > 0 ? 1 : 0;
    }
    return total;
  }

  void assign(std::size_t g, Side side, SplitAssignment* out, std::int64_t step,
              std::int64_t gain) {
    assigned_[g] = 1;
    side_[g] = side;
    out->side_by_group[g] = side;
    out->iteration_log.push_back({step, g, side, gain});
  }

  // Fold a test group's concept occurrences into the uncovered multiset.
  std::int64_t fold(std::uint32_t g, CandidateHeap* heap) {
    std::int64_t folded = 0;
    const std::int64_t members = p_.sizes[g];
    for (std::uint32_t c : p_.cids[g]) {
      if (covered_[c]) continue;
      std::int64_t old = uncovered_[c];
      uncovered_[c] = old + members;
      folded += members;
      std::int64_t delta =
          cfg_.weighting == GainWeighting::Frequency ? members : (old == 0 ? 1 : 0);
      if (delta != 0) bump_gains(c, delta, heap);
    }
    return folded;
  }

  // A train assignment covers all of the group's concepts for good.
  void cover(std::uint32_t g, CandidateHeap* heap) {
    for (std::uint32_t c : p_.cids[g]) {
      if (covered_[c]) continue;
      covered_[c] = 1;
      std::int64_t delta =
          cfg_.weighting == GainWeighting::Frequency ? -uncovered_[c] : (uncovered_[c] > 0 ? -1 : 0);
      uncovered_[c] = 0;
      if (delta != 0) bump_gains(c, delta, heap);
    }
  }

  void bump_gains(std::uint32_t c, std::int64_t delta, CandidateHeap* heap) {
    if (!heap) return;  // scan engine recomputes gains from uncovered_
    for (std::uint32_t g : p_.inv[c]) {
      if (assigned_[g]) continue;
      gain_[g] += delta;
      heap->update(g);
    }
  }

  std::uint32_t scan_best() const {
    const std::int64_t n = static_cast<std::int64_t>(groups_.size());
    std::int64_t best = -1;
#ifdef _OPENMP
    int threads = cfg_.threads > 0 ? cfg_.threads : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
      std::int64_t local = -1;
#pragma omp for schedule(static) nowait
      for (std::int64_t g = 0; g < n; ++g) {
        if (assigned_[static_cast<std::size_t>(g)]) continue;
        if (local < 0 || better_candidate(static_cast<std::uint32_t>(g),
                                          static_cast<std::uint32_t>(local))) {
          local = g;
        }
      }
#pragma omp critical
      {
        if (local >= 0 && (best < 0 || better_candidate(static_cast<std::uint32_t>(local),
                                                        static_cast<std::uint32_t>(best)))) {
          best = local;
        }
      }
    }
#else
    for (std::int64_t g = 0; g < n; ++g) {
      if (assigned_[static_cast<std::size_t>(g)]) continue;
      if (best < 0 || better_candidate(static_cast<std::uint32_t>(g),
                                       static_cast<std::uint32_t>(best))) {
        best = g;
      }
    }
#endif
    return static_cast<std::uint32_t>(best);
  }

  // Strict total order on candidates, so the scan winner is unique and
  // independent of the merge order of OpenMP threads.
  bool better_candidate(std::uint32_t a, std::uint32_t b) const {
    std::int64_t ga = current_gain(a);
    std::int64_t gb = current_gain(b);
    if (ga != gb) return ga > gb;
    if (p_.sizes[a] != p_.sizes[b]) return p_.sizes[a] > p_.sizes[b];
    return p_.key_rank[a] < p_.key_rank[b];
  }

  void finalize_uncovered(SplitAssignment* out) const {
    for (std::size_t c = 0; c < uncovered_.size(); ++c) {
      if (uncovered_[c] > 0) out->uncovered_final.emplace_back(p_.concept_names[c], uncovered_[c]);
    }
    std::sort(out->uncovered_final.begin(), out->uncovered_final.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
  }

  const std::vector<QaGroup>& groups_;
  const SplitConfig& cfg_;
  Prepared p_;
  std::vector<char> assigned_;
  std::vector<Side> side_;
  std::vector<std::int64_t> uncovered_;
  std::vector<char> covered_;
  std::vector<std::int64_t> gain_;
};

}  // namespace

SplitAssignment greedy_split(const std::vector<QaGroup>& groups, const SplitConfig& cfg) {
  if (!cfg.target_test_fraction.proper()) {
    throw UsageError("target_test_fraction must be in (0,1)");
  }
  if (groups.empty()) return SplitAssignment{};
  GreedyRun run(groups, cfg);
  return run.run();
}

SplitOutput random_split(const Corpus& corpus, const Fraction& fraction, std::uint64_t seed) {
  if (!fraction.proper()) throw UsageError("fraction must be in (0,1)");
  std::vector<std::size_t> idx(corpus.records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 gen(seed);
  fisher_yates(idx, gen);

  const std::int64_t held_out = fraction.ceil_mul(static_cast<std::int64_t>(idx.size()));
  SplitOutput out;
  out.train.source_label = corpus.source_label + ":random-train";
  out.test.source_label = corpus.source_label + ":random-test";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const QaRecord& r = corpus.records[idx[i]];
    if (static_cast<std::int64_t>(i) < held_out) {
      out.test.records.push_back(r);
    } else {
      out.train.records.push_back(r);
    }
  }
  auto by_id = [](const QaRecord& a, const QaRecord& b) { return a.question_id < b.question_id; };
  std::sort(out.train.records.begin(), out.train.records.end(), by_id);
  std::sort(out.test.records.begin(), out.test.records.end(), by_id);
  out.manifest.train = count_side(out.train);
  out.manifest.test = count_side(out.test);
  out.manifest.iteration_log_digest = fnv1a_hex("");
  return out;
}

SplitOutput materialize(const SplitAssignment& assignment, const std::vector<QaGroup>& groups,
                        const Corpus& corpus) {
  if (assignment.side_by_group.size() != groups.size()) {
    throw Error("materialize: assignment does not cover the group list");
  }
  std::unordered_map<std::int64_t, const QaRecord*> by_id;
  by_id.reserve(corpus.records.size());
  for (const QaRecord& r : corpus.records) by_id.emplace(r.question_id, &r);

  SplitOutput out;
  out.train.source_label = corpus.source_label + ":train";
  out.test.source_label = corpus.source_label + ":test";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Corpus& side = assignment.side_by_group[g] == Side::Test ? out.test : out.train;
    for (std::int64_t id : groups[g].member_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw Error("materialize: question_id " + std::to_string(id) + " not in corpus");
      }
      side.records.push_back(*it->second);
    }
  }
  auto by_qid = [](const QaRecord& a, const QaRecord& b) { return a.question_id < b.question_id; };
  std::sort(out.train.records.begin(), out.train.records.end(), by_qid);
  std::sort(out.test.records.begin(), out.test.records.end(), by_qid);
  out.manifest.train = count_side(out.train);
  out.manifest.test = count_side(out.test);
  out.manifest.iteration_log_digest = iteration_log_digest(assignment, groups);
  return out;
}

std::string iteration_log_digest(const SplitAssignment& assignment,
                                 const std::vector<QaGroup>& groups) {
  Fnv1a h;
  for (const IterationEntry& e : assignment.iteration_log) {
    h.update(std::to_string(e.step));
    h.update("|");
    h.update(to_string(e.side));
    h.update("|");
    h.update(groups[e.group_index].key.reduced.joined());
    h.update("|");
    h.update(groups[e.group_index].key.answer);
    h.update("|");
    h.update(std::to_string(e.uncovered_weight_gain));
    h.update("\n");
  }
  return h.hex();
}

void dump_iteration_log_jsonl(const SplitAssignment& assignment,
                              const std::vector<QaGroup>& groups, const std::string& path) {
  std::string buf;
  for (const IterationEntry& e : assignment.iteration_log) {
    const QaGroup& g = groups[e.group_index];
    nlohmann::json line{{"step", e.step},
                        {"side", to_string(e.side)},
                        {"key_tokens", g.key.reduced.tokens},
                        {"answer", g.key.answer},
                        {"members", g.member_ids.size()},
                        {"gain", e.uncovered_weight_gain}};
    buf += line.dump();
    buf += '\n';
  }
  write_text_file(path, buf);
}

const char* to_string(Side side) { return side == Side::Train ? "train" : "test"; }

const char* to_string(GroupOrder order) {
  switch (order) {
    case GroupOrder::SizeDescThenKey: return "size_desc_then_key";
    case GroupOrder::KeyLex: return "key_lex";
    case GroupOrder::InputOrder: return "input_order";
    case GroupOrder::Shuffled: return "shuffled";
  }
  return "?";
}

const char* to_string(GainWeighting weighting) {
  return weighting == GainWeighting::Frequency ? "frequency" : "unique";
}

const char* to_string(GreedyEngine engine) {
  return engine == GreedyEngine::Heap ? "heap" : "scan";
}

}  // namespace compsplit
