#include "docre/synth.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "docre/errors.hpp"
#include "docre/rng.hpp"

namespace docre {

namespace {

const char* kEntityTypes[] = {"PER", "ORG", "LOC", "TIME", "NUM", "MISC"};

struct SlotGrid {
    std::vector<std::vector<bool>> used;  // per sentence, per token

    explicit SlotGrid(const std::vector<int>& lens) {
        for (int len : lens) used.emplace_back(static_cast<std::size_t>(len), false);
    }

    int free_in(int s) const {
        int n = 0;
        for (bool u : used[static_cast<std::size_t>(s)])
            if (!u) ++n;
        return n;
    }

    // Claims one free slot in sentence s, chosen uniformly. -1 when full.
    int claim(int s, Rng& rng) {
        std::vector<int> free;
        const auto& row = used[static_cast<std::size_t>(s)];
        for (std::size_t i = 0; i < row.size(); ++i)
            if (!row[i]) free.push_back(static_cast<int>(i));
        if (free.empty()) return -1;
        const int pos = free[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(free.size()) - 1))];
        used[static_cast<std::size_t>(s)][static_cast<std::size_t>(pos)] = true;
        return pos;
    }
};

struct DocBuilder {
    std::vector<int> lens;
    SlotGrid grid;
    std::vector<std::vector<std::string>> tokens;
    Document doc;
    // per entity, set of sentences with a mention
    std::vector<std::set<int>> entity_sents;

    DocBuilder(const std::vector<int>& sentence_lens)
        : lens(sentence_lens), grid(sentence_lens) {
        for (int len : lens) tokens.emplace_back(static_cast<std::size_t>(len));
    }

    int n_sents() const { return static_cast<int>(lens.size()); }

    bool has_mention(int entity, int s) const {
        return entity_sents[static_cast<std::size_t>(entity)].count(s) > 0;
    }

    // Places a single-token mention of `entity` in sentence s; false when
    // the sentence is full.
    bool place_mention(int entity, int s, Rng& rng) {
        if (has_mention(entity, s)) return true;
        const int pos = grid.claim(s, rng);
        if (pos < 0) return false;
        const std::string alias = doc.entities[static_cast<std::size_t>(entity)].mentions.empty()
                                      ? ""
                                      : doc.entities[static_cast<std::size_t>(entity)]
                                            .mentions.front()
                                            .surface;
        Mention m;
        m.sentence_index = s;
        m.start = pos;
        m.end = pos + 1;
        m.surface = alias;
        doc.entities[static_cast<std::size_t>(entity)].mentions.push_back(m);
        entity_sents[static_cast<std::size_t>(entity)].insert(s);
        tokens[static_cast<std::size_t>(s)][static_cast<std::size_t>(pos)] = alias;
        return true;
    }

    bool place_cue(const std::string& cue, int s, Rng& rng) {
        const int pos = grid.claim(s, rng);
        if (pos < 0) return false;
        tokens[static_cast<std::size_t>(s)][static_cast<std::size_t>(pos)] = cue;
        return true;
    }

    // Sentences with at least `want` free slots, or any mention of `entity`.
    std::vector<int> candidate_sents(int entity, int want) const {
        std::vector<int> out;
        for (int s = 0; s < n_sents(); ++s)
            if (has_mention(entity, s) || grid.free_in(s) >= want) out.push_back(s);
        return out;
    }
};

int pick(const std::vector<int>& v, Rng& rng) {
    return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

}  // namespace

SynthResult synth_corpus(std::uint64_t seed, int n_docs, const SynthConfig& cfg) {
    if (n_docs < 1) throw ValidationError("synth_corpus: n_docs must be >= 1");
    if (cfg.n_entities_min > cfg.n_sentences_max * cfg.sentence_len_max)
        throw ValidationError("synth_corpus: entity count exceeds token budget");
    if (cfg.force_pattern == PathKind::Logical && cfg.n_entities_min < 3)
        throw ValidationError("synth_corpus: LR pattern needs at least 3 entities");

    Rng master(seed);
    SynthResult result;

    for (int d = 0; d < n_docs; ++d) {
        Rng rng = master.fork(static_cast<std::uint64_t>(d) + 1);

        const int n_sents = static_cast<int>(rng.uniform_int(cfg.n_sentences_min, cfg.n_sentences_max));
        std::vector<int> lens;
        for (int s = 0; s < n_sents; ++s)
            lens.push_back(static_cast<int>(rng.uniform_int(cfg.sentence_len_min, cfg.sentence_len_max)));

        const int n_entities = static_cast<int>(rng.uniform_int(cfg.n_entities_min, cfg.n_entities_max));
        const int budget = std::accumulate(lens.begin(), lens.end(), 0);
        if (n_entities > budget)
            throw ValidationError("synth_corpus: entity count exceeds token budget in doc " +
                                  std::to_string(d));

        DocBuilder b(lens);
        b.doc.title = "synth-" + std::to_string(seed) + "-" + std::to_string(d);
        b.entity_sents.resize(static_cast<std::size_t>(n_entities));
        for (int e = 0; e < n_entities; ++e) {
            Entity ent;
            ent.entity_type = kEntityTypes[e % 6];
            b.doc.entities.push_back(ent);
        }
        // Seed each entity's alias through a first placed mention later;
        // aliases are unique per (doc, entity) so facts are memorizable.
        std::vector<std::string> alias(static_cast<std::size_t>(n_entities));
        for (int e = 0; e < n_entities; ++e)
            alias[static_cast<std::size_t>(e)] =
                "ent" + std::to_string(d) + "e" + std::to_string(e);

        auto place = [&](int entity, int s) -> bool {
            auto& ent = b.doc.entities[static_cast<std::size_t>(entity)];
            if (ent.mentions.empty()) {
                // first mention defines the alias token
                if (b.has_mention(entity, s)) return true;
                const int pos = b.grid.claim(s, rng);
                if (pos < 0) return false;
                Mention m;
                m.sentence_index = s;
                m.start = pos;
                m.end = pos + 1;
                m.surface = alias[static_cast<std::size_t>(entity)];
                ent.mentions.push_back(m);
                b.entity_sents[static_cast<std::size_t>(entity)].insert(s);
                b.tokens[static_cast<std::size_t>(s)][static_cast<std::size_t>(pos)] = m.surface;
                return true;
            }
            return b.place_mention(entity, s, rng);
        };

        const int n_facts = static_cast<int>(rng.uniform_int(cfg.facts_min, cfg.facts_max));
        std::set<std::pair<int, int>> used_pairs;
        std::set<int> pinned;  // LR heads/tails kept in their own sentences

        for (int f = 0; f < n_facts; ++f) {
            PathKind pattern;
            if (cfg.force_pattern)
                pattern = *cfg.force_pattern;
            else {
                const auto roll = rng.uniform_int(0, 2);
                pattern = roll == 0 ? PathKind::Intra
                                    : (roll == 1 ? PathKind::Logical : PathKind::Coref);
                if (pattern == PathKind::Logical && (n_entities < 3 || n_sents < 2))
                    pattern = PathKind::Intra;
                if (pattern == PathKind::Coref && n_sents < 2) pattern = PathKind::Intra;
            }

            // Pick a fresh ordered entity pair.
            int head = -1, tail = -1;
            for (int attempt = 0; attempt < 50; ++attempt) {
                const int h = static_cast<int>(rng.uniform_int(0, n_entities - 1));
                const int t = static_cast<int>(rng.uniform_int(0, n_entities - 1));
                if (h == t) continue;
                if (used_pairs.count({h, t})) continue;
                if (pattern == PathKind::Logical && (pinned.count(h) || pinned.count(t))) continue;
                head = h;
                tail = t;
                break;
            }
            if (head < 0) break;  // no fresh pair left; fewer facts for this doc

            // The relation is a fixed function of the (head type, tail type)
            // pair, so planted facts are inferable from shared vocabulary
            // (types, cues) rather than only memorizable via aliases.
            const int rel_id =
                static_cast<int>(((head % 6) * 7 + (tail % 6) * 11) % cfg.n_relations);
            const std::string rel = "R" + std::to_string(rel_id);
            RelationFact fact;
            fact.head = head;
            fact.tail = tail;
            fact.relation = rel;
            const std::string cue = "cue_" + rel;

            bool ok = false;
            if (pattern == PathKind::Intra) {
                auto cands = b.candidate_sents(head, 3);
                if (!cands.empty()) {
                    const int s = pick(cands, rng);
                    ok = place(head, s) && place(tail, s);
                    if (ok && cfg.relation_cues) b.place_cue(cue, s, rng);
                    if (ok) fact.evidence = {s};
                }
            } else if (pattern == PathKind::Coref) {
                if (n_sents >= 2) {
                    const int s1 = static_cast<int>(rng.uniform_int(0, n_sents - 1));
                    int s2 = static_cast<int>(rng.uniform_int(0, n_sents - 2));
                    if (s2 >= s1) ++s2;
                    ok = place(head, s1) && place(tail, s2);
                    if (ok && cfg.relation_cues) {
                        b.place_cue(cue, s1, rng);
                        b.place_cue(cue, s2, rng);
                    }
                    if (ok) fact.evidence = {std::min(s1, s2), std::max(s1, s2)};
                }
            } else {  // Logical
                int bridge = -1;
                for (int attempt = 0; attempt < 50; ++attempt) {
                    const int c = static_cast<int>(rng.uniform_int(0, n_entities - 1));
                    if (c != head && c != tail && !pinned.count(c)) {
                        bridge = c;
                        break;
                    }
                }
                if (bridge >= 0 && n_sents >= 2) {
                    const int s1 = static_cast<int>(rng.uniform_int(0, n_sents - 1));
                    int s2 = static_cast<int>(rng.uniform_int(0, n_sents - 2));
                    if (s2 >= s1) ++s2;
                    ok = place(head, s1) && place(bridge, s1) && place(bridge, s2) &&
                         place(tail, s2);
                    if (ok && cfg.relation_cues) {
                        b.place_cue(cue, s1, rng);
                        b.place_cue(cue, s2, rng);
                    }
                    if (ok) {
                        fact.evidence = {std::min(s1, s2), std::max(s1, s2)};
                        pinned.insert(head);
                        pinned.insert(tail);
                    }
                }
            }
            if (!ok) continue;

            used_pairs.insert({head, tail});
            result.plants.push_back(
                {d, static_cast<int>(b.doc.facts.size()), pattern});
            b.doc.facts.push_back(std::move(fact));
        }

        // Every entity needs at least one mention.
        for (int e = 0; e < n_entities; ++e) {
            if (!b.doc.entities[static_cast<std::size_t>(e)].mentions.empty()) continue;
            bool placed = false;
            for (int s = 0; s < n_sents && !placed; ++s)
                if (b.grid.free_in(s) > 0) placed = place(e, s);
            if (!placed)
                throw ValidationError("synth_corpus: entity count exceeds token budget in doc " +
                                      std::to_string(d));
        }

        // Extra mentions create coreference edges and extra paths.
        for (int e = 0; e < n_entities; ++e) {
            if (pinned.count(e)) continue;
            if (rng.uniform() >= cfg.extra_mention_prob) continue;
            const int s = static_cast<int>(rng.uniform_int(0, n_sents - 1));
            if (!b.has_mention(e, s) && b.grid.free_in(s) > 0) place(e, s);
        }

        // Fill the remaining slots with filler words.
        for (int s = 0; s < n_sents; ++s) {
            for (int j = 0; j < lens[static_cast<std::size_t>(s)]; ++j) {
                auto& tok = b.tokens[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
                if (tok.empty())
                    tok = "f" + std::to_string(rng.uniform_int(0, cfg.filler_vocab - 1));
            }
        }
        b.doc.sentences = std::move(b.tokens);

        // Keep mention lists in document order.
        for (auto& ent : b.doc.entities)
            std::sort(ent.mentions.begin(), ent.mentions.end(),
                      [](const Mention& x, const Mention& y) {
                          return std::tie(x.sentence_index, x.start) <
                                 std::tie(y.sentence_index, y.start);
                      });

        result.corpus.push_back(std::move(b.doc));
    }
    return result;
}

}  // namespace docre
