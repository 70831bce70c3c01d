// Brute-force reference enumeration. Kept deliberately independent of
// metapath.cpp: plain nested loops over all mention tuples and an inline
// ordering comparison, so the two implementations can check each other.
#include <algorithm>

#include "docre/errors.hpp"
#include "docre/metapath.hpp"

namespace docre {

namespace {

MentionRef ref_of(const Document& doc, int entity, int mention) {
    const Mention& m =
        doc.entities[static_cast<std::size_t>(entity)].mentions[static_cast<std::size_t>(mention)];
    return {entity, mention, m.sentence_index, m.start};
}

}  // namespace

PathSet oracle_enumerate(const Document& doc, int head, int tail) {
    const int n_ents = static_cast<int>(doc.entities.size());
    if (head == tail) throw ValidationError("oracle_enumerate: head == tail");
    if (head < 0 || head >= n_ents || tail < 0 || tail >= n_ents)
        throw ValidationError("oracle_enumerate: entity index out of range");

    const auto& hms = doc.entities[static_cast<std::size_t>(head)].mentions;
    const auto& tms = doc.entities[static_cast<std::size_t>(tail)].mentions;

    PathSet out;
    for (std::size_t a = 0; a < hms.size(); ++a) {
        for (std::size_t b = 0; b < tms.size(); ++b) {
            const MentionRef hm = ref_of(doc, head, static_cast<int>(a));
            const MentionRef tm = ref_of(doc, tail, static_cast<int>(b));
            if (hm.sentence == tm.sentence)
                out.ir.push_back({hm, tm, hm.sentence});
            else
                out.cr.push_back({hm, tm, hm.sentence, tm.sentence});
        }
    }

    for (int el = 0; el < n_ents; ++el) {
        if (el == head || el == tail) continue;
        const auto& bms = doc.entities[static_cast<std::size_t>(el)].mentions;
        for (std::size_t a = 0; a < hms.size(); ++a) {
            for (std::size_t b = 0; b < tms.size(); ++b) {
                if (hms[a].sentence_index == tms[b].sentence_index) continue;
                for (std::size_t c1 = 0; c1 < bms.size(); ++c1) {
                    if (bms[c1].sentence_index != hms[a].sentence_index) continue;
                    for (std::size_t c2 = 0; c2 < bms.size(); ++c2) {
                        if (bms[c2].sentence_index != tms[b].sentence_index) continue;
                        out.lr.push_back({ref_of(doc, head, static_cast<int>(a)),
                                          ref_of(doc, el, static_cast<int>(c1)),
                                          ref_of(doc, el, static_cast<int>(c2)),
                                          ref_of(doc, tail, static_cast<int>(b)),
                                          hms[a].sentence_index, tms[b].sentence_index, el});
                    }
                }
            }
        }
    }

    std::sort(out.ir.begin(), out.ir.end(), [](const IrPath& x, const IrPath& y) {
        return std::tie(x.sentence, x.head_m.start, x.tail_m.start, x.head_m.mention,
                        x.tail_m.mention) < std::tie(y.sentence, y.head_m.start, y.tail_m.start,
                                                     y.head_m.mention, y.tail_m.mention);
    });
    std::sort(out.lr.begin(), out.lr.end(), [](const LrPath& x, const LrPath& y) {
        return std::tie(x.s1, x.head_m.start, x.s2, x.tail_m.start, x.bridge_entity,
                        x.bridge_m1.start, x.bridge_m2.start, x.head_m.mention, x.tail_m.mention,
                        x.bridge_m1.mention, x.bridge_m2.mention) <
               std::tie(y.s1, y.head_m.start, y.s2, y.tail_m.start, y.bridge_entity,
                        y.bridge_m1.start, y.bridge_m2.start, y.head_m.mention, y.tail_m.mention,
                        y.bridge_m1.mention, y.bridge_m2.mention);
    });
    std::sort(out.cr.begin(), out.cr.end(), [](const CrPath& x, const CrPath& y) {
        return std::tie(x.s1, x.head_m.start, x.s2, x.tail_m.start, x.head_m.mention,
                        x.tail_m.mention) < std::tie(y.s1, y.head_m.start, y.s2, y.tail_m.start,
                                                     y.head_m.mention, y.tail_m.mention);
    });
    return out;
}

}  // namespace docre
