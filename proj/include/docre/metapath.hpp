#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "docre/corpus.hpp"
#include "docre/pathkind.hpp"

namespace docre {

// Resolved mention reference: indices plus the position snapshot used for
// canonical ordering.
struct MentionRef {
    int entity = 0;
    int mention = 0;   // index within the entity's mention list
    int sentence = 0;
    int start = 0;

    bool operator==(const MentionRef&) const = default;
};

// head and tail mention inside one sentence.
struct IrPath {
    MentionRef head_m, tail_m;
    int sentence = 0;

    bool operator==(const IrPath&) const = default;
};

// head in s1, tail in s2 (s1 != s2), connected through a bridge entity
// mentioned in both sentences.
struct LrPath {
    MentionRef head_m, bridge_m1, bridge_m2, tail_m;
    int s1 = 0, s2 = 0;
    int bridge_entity = 0;

    bool operator==(const LrPath&) const = default;
};

// head and tail mentions in different sentences.
struct CrPath {
    MentionRef head_m, tail_m;
    int s1 = 0, s2 = 0;

    bool operator==(const CrPath&) const = default;
};

// All paths for one ordered entity pair, each list in canonical order:
// lexicographic on (s1, head start, s2, tail start, bridge entity,
// bridge starts), absent fields treated as -1.
struct PathSet {
    std::vector<IrPath> ir;
    std::vector<LrPath> lr;
    std::vector<CrPath> cr;

    std::size_t total() const { return ir.size() + lr.size() + cr.size(); }
    bool operator==(const PathSet&) const = default;
};

// Per-type prefix of a PathSet truncated to at most K paths.
struct PathBundle {
    std::vector<IrPath> ir;
    std::vector<LrPath> lr;
    std::vector<CrPath> cr;
    int k = 0;

    std::size_t total() const { return ir.size() + lr.size() + cr.size(); }
};

// All reasoning paths between head and tail. head == tail -> error.
PathSet enumerate_paths(const Document& doc, int head, int tail);

// Independent brute-force enumeration (plain nested loops over all
// mention tuples); shares only the path types with enumerate_paths.
PathSet oracle_enumerate(const Document& doc, int head, int tail);

// Keeps the first min(K, available) paths per type. Errors when the set
// is empty in all three types (corrupt annotations).
PathBundle select_paths(const PathSet& paths, int k);

struct CoverageReport {
    std::int64_t n_documents = 0;
    std::int64_t n_pairs = 0;
    std::int64_t n_pairs_fully_covered = 0;  // every path survives truncation at K
    double cover_pairs = 0.0;                // n_pairs_fully_covered / n_pairs
    double cover_paths = 0.0;                // retained paths / total paths
    // Fraction of pairs with at least one path of the type, indexed by
    // PathKind order IR, LR, CR.
    std::array<double, 3> type_available{};
    // Per-type path-count histograms: count -> number of pairs (counts
    // above 10 collapse into the 11 bucket).
    std::array<std::map<int, std::int64_t>, 3> histogram{};
    int k = 0;
};

// Statistics over all ordered entity pairs of the corpus. Empty corpus ->
// error.
CoverageReport coverage_stats(const Corpus& corpus, int k);

}  // namespace docre
