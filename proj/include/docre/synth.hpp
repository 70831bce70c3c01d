#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "docre/corpus.hpp"
#include "docre/pathkind.hpp"

namespace docre {

// Settings for the deterministic document generator. Every generated fact
// is planted so that it is recoverable through at least one of the three
// path patterns; the generator records which one.
struct SynthConfig {
    int n_sentences_min = 2;
    int n_sentences_max = 4;
    int sentence_len_min = 8;
    int sentence_len_max = 12;
    int n_entities_min = 4;
    int n_entities_max = 6;
    int facts_min = 2;
    int facts_max = 4;
    int n_relations = 5;
    int filler_vocab = 40;
    double extra_mention_prob = 0.35;
    // Insert a relation-specific cue token into the evidence sentences so
    // the planted fact is inferable from content, not only memorizable.
    bool relation_cues = true;
    // When set, every fact uses this pattern; the LR shape additionally
    // keeps head/tail out of each other's sentences.
    std::optional<PathKind> force_pattern;
};

struct PlantRecord {
    int doc_index = 0;
    int fact_index = 0;
    PathKind pattern = PathKind::Intra;
};

struct SynthResult {
    Corpus corpus;
    std::vector<PlantRecord> plants;
};

// Deterministic for fixed (seed, cfg). Throws ValidationError when the
// requested entity count cannot fit the token budget.
SynthResult synth_corpus(std::uint64_t seed, int n_docs, const SynthConfig& cfg = {});

}  // namespace docre
