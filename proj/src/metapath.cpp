#include "docre/metapath.hpp"

#include <algorithm>
#include <map>

#include "docre/errors.hpp"

namespace docre {

namespace {

// Mentions grouped by sentence, in document order within each sentence.
std::map<int, std::vector<MentionRef>> by_sentence(const Document& doc, int entity) {
    std::map<int, std::vector<MentionRef>> out;
    const auto& mentions = doc.entities[static_cast<std::size_t>(entity)].mentions;
    for (std::size_t k = 0; k < mentions.size(); ++k) {
        const Mention& m = mentions[k];
        out[m.sentence_index].push_back(
            {entity, static_cast<int>(k), m.sentence_index, m.start});
    }
    return out;
}

// Index tiebreaks at the end keep the order total even when distinct
// mentions share a position.
struct CanonicalKey {
    int s1, mi_start, s2, mj_start, bridge, ml1_start, ml2_start;
    int mi_idx, mj_idx, ml1_idx, ml2_idx;
    auto tie() const {
        return std::tie(s1, mi_start, s2, mj_start, bridge, ml1_start, ml2_start, mi_idx, mj_idx,
                        ml1_idx, ml2_idx);
    }
};

CanonicalKey key_of(const IrPath& p) {
    return {p.sentence, p.head_m.start, -1, p.tail_m.start, -1, -1, -1,
            p.head_m.mention, p.tail_m.mention, -1, -1};
}
CanonicalKey key_of(const LrPath& p) {
    return {p.s1, p.head_m.start, p.s2, p.tail_m.start, p.bridge_entity, p.bridge_m1.start,
            p.bridge_m2.start, p.head_m.mention, p.tail_m.mention, p.bridge_m1.mention,
            p.bridge_m2.mention};
}
CanonicalKey key_of(const CrPath& p) {
    return {p.s1, p.head_m.start, p.s2, p.tail_m.start, -1, -1, -1,
            p.head_m.mention, p.tail_m.mention, -1, -1};
}

template <typename P>
void canonical_sort(std::vector<P>& v) {
    std::sort(v.begin(), v.end(),
              [](const P& a, const P& b) { return key_of(a).tie() < key_of(b).tie(); });
}

}  // namespace

PathSet enumerate_paths(const Document& doc, int head, int tail) {
    const int n_ents = static_cast<int>(doc.entities.size());
    if (head == tail) throw ValidationError("enumerate_paths: head == tail");
    if (head < 0 || head >= n_ents || tail < 0 || tail >= n_ents)
        throw ValidationError("enumerate_paths: entity index out of range");

    const auto head_sents = by_sentence(doc, head);
    const auto tail_sents = by_sentence(doc, tail);

    PathSet out;
    for (const auto& [sh, hms] : head_sents) {
        for (const auto& [st, tms] : tail_sents) {
            if (sh == st) {
                for (const auto& hm : hms)
                    for (const auto& tm : tms) out.ir.push_back({hm, tm, sh});
            } else {
                for (const auto& hm : hms)
                    for (const auto& tm : tms) out.cr.push_back({hm, tm, sh, st});
            }
        }
    }

    for (int bridge = 0; bridge < n_ents; ++bridge) {
        if (bridge == head || bridge == tail) continue;
        const auto bridge_sents = by_sentence(doc, bridge);
        for (const auto& [s1, hms] : head_sents) {
            auto b1 = bridge_sents.find(s1);
            if (b1 == bridge_sents.end()) continue;
            for (const auto& [s2, tms] : tail_sents) {
                if (s2 == s1) continue;
                auto b2 = bridge_sents.find(s2);
                if (b2 == bridge_sents.end()) continue;
                for (const auto& hm : hms)
                    for (const auto& m1 : b1->second)
                        for (const auto& m2 : b2->second)
                            for (const auto& tm : tms)
                                out.lr.push_back({hm, m1, m2, tm, s1, s2, bridge});
            }
        }
    }

    canonical_sort(out.ir);
    canonical_sort(out.lr);
    canonical_sort(out.cr);
    return out;
}

PathBundle select_paths(const PathSet& paths, int k) {
    if (k < 1) throw ValidationError("select_paths: K must be >= 1");
    if (paths.total() == 0)
        throw ValidationError(
            "select_paths: no reasoning path of any type (corrupt annotations)");
    PathBundle b;
    b.k = k;
    const auto take = [k](const auto& src, auto& dst) {
        const std::size_t n = std::min<std::size_t>(src.size(), static_cast<std::size_t>(k));
        dst.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(n));
    };
    take(paths.ir, b.ir);
    take(paths.lr, b.lr);
    take(paths.cr, b.cr);
    return b;
}

CoverageReport coverage_stats(const Corpus& corpus, int k) {
    if (corpus.empty()) throw ValidationError("coverage_stats: empty corpus");
    if (k < 1) throw ValidationError("coverage_stats: K must be >= 1");

    CoverageReport rep;
    rep.k = k;
    rep.n_documents = static_cast<std::int64_t>(corpus.size());
    std::int64_t retained = 0, total = 0;
    std::array<std::int64_t, 3> available{};

    for (const auto& doc : corpus) {
        const int n_ents = static_cast<int>(doc.entities.size());
        for (int i = 0; i < n_ents; ++i) {
            for (int j = 0; j < n_ents; ++j) {
                if (i == j) continue;
                const PathSet ps = enumerate_paths(doc, i, j);
                ++rep.n_pairs;
                const std::array<std::int64_t, 3> counts = {
                    static_cast<std::int64_t>(ps.ir.size()),
                    static_cast<std::int64_t>(ps.lr.size()),
                    static_cast<std::int64_t>(ps.cr.size())};
                bool fully = true;
                for (int t = 0; t < 3; ++t) {
                    if (counts[static_cast<std::size_t>(t)] > k) fully = false;
                    retained += std::min<std::int64_t>(counts[static_cast<std::size_t>(t)], k);
                    total += counts[static_cast<std::size_t>(t)];
                    if (counts[static_cast<std::size_t>(t)] > 0)
                        ++available[static_cast<std::size_t>(t)];
                    const int bucket =
                        counts[static_cast<std::size_t>(t)] > 10
                            ? 11
                            : static_cast<int>(counts[static_cast<std::size_t>(t)]);
                    ++rep.histogram[static_cast<std::size_t>(t)][bucket];
                }
                if (fully) ++rep.n_pairs_fully_covered;
            }
        }
    }
    if (rep.n_pairs > 0) {
        rep.cover_pairs = static_cast<double>(rep.n_pairs_fully_covered) /
                          static_cast<double>(rep.n_pairs);
        for (int t = 0; t < 3; ++t)
            rep.type_available[static_cast<std::size_t>(t)] =
                static_cast<double>(available[static_cast<std::size_t>(t)]) /
                static_cast<double>(rep.n_pairs);
    }
    rep.cover_paths = total > 0 ? static_cast<double>(retained) / static_cast<double>(total) : 1.0;
    return rep;
}

}  // namespace docre
