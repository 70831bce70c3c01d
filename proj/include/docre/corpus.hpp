#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace docre {

// A contiguous token span referring to an entity. Spans are half-open
// [start, end) token offsets within one sentence.
struct Mention {
    int sentence_index = 0;
    int start = 0;
    int end = 0;
    std::string surface;

    bool operator==(const Mention&) const = default;
};

struct Entity {
    std::string entity_type;
    std::vector<Mention> mentions;  // sorted by (sentence_index, start)

    bool operator==(const Entity&) const = default;
};

struct RelationFact {
    int head = 0;  // entity index
    int tail = 0;  // entity index
    std::string relation;
    std::vector<int> evidence;  // sentence indices

    bool operator==(const RelationFact&) const = default;
};

// The input unit of the whole pipeline: pre-tokenized sentences plus
// entity/mention annotations and (optionally) gold relation facts.
// Documents are immutable after load; downstream modules treat them as
// read-only.
struct Document {
    std::string title;
    std::vector<std::vector<std::string>> sentences;
    std::vector<Entity> entities;
    std::vector<RelationFact> facts;

    bool operator==(const Document&) const = default;

    int total_mentions() const {
        int n = 0;
        for (const auto& e : entities) n += static_cast<int>(e.mentions.size());
        return n;
    }
};

using Corpus = std::vector<Document>;

// Word / relation / entity-type inventories with dense ids.
struct Vocab {
    static constexpr int kPadId = 0;
    static constexpr int kUnkId = 1;

    std::map<std::string, int> word_to_id;      // includes <pad>=0, <unk>=1
    std::map<std::string, int> relation_to_id;  // dense from 0
    std::map<std::string, int> type_to_id;      // dense from 0
    int min_freq = 1;
    bool lowercase = true;

    int n_words() const { return static_cast<int>(word_to_id.size()); }
    int n_relations() const { return static_cast<int>(relation_to_id.size()); }
    int n_types() const { return static_cast<int>(type_to_id.size()); }

    // Token -> id with casing rule applied; unknown -> <unk>.
    int word_id(const std::string& token) const;
    // Relation code -> id; -1 when unknown.
    int relation_id(const std::string& code) const;
    // Entity type -> id; -1 when unknown.
    int type_id(const std::string& type) const;
    // Inverse relation map (id -> code), built on demand.
    std::vector<std::string> relation_codes() const;
};

// Loads a DocRED-format JSON file: an array of documents with fields
// title / sents / vertexSet / labels ("labels" optional for unlabeled
// splits). Every document must pass validate_document; a violation raises
// ValidationError naming the document and field. When a vocab is given,
// fact relation codes must belong to its inventory.
Corpus load_corpus(const std::string& path, const std::optional<Vocab>& vocab = std::nullopt);

// Same loader over an in-memory JSON string ("source" names the origin in
// error messages).
Corpus parse_corpus(const std::string& json_text, const std::string& source,
                    const std::optional<Vocab>& vocab = std::nullopt);

// Structural invariant check. Returns human-readable violation
// descriptions, one per offending entity/mention/fact; empty iff the
// document is valid. Violations are data, not errors.
std::vector<std::string> validate_document(const Document& doc);

// Canonical corpus serialization (also valid load_corpus input).
// load_corpus(serialize(corpus)) == corpus for all valid corpora.
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

// Builds the vocab over a corpus: words with frequency < min_freq map to
// <unk>; the relation inventory is the union of all fact codes; the type
// inventory is the union of all entity types. Empty corpus -> error.
Vocab build_vocab(const Corpus& corpus, int min_freq, bool lowercase = true);

std::string serialize_vocab(const Vocab& vocab);
Vocab parse_vocab(const std::string& json_text);
void save_vocab(const Vocab& vocab, const std::string& path);
Vocab load_vocab(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace docre
