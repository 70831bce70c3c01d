#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "docre/corpus.hpp"

namespace docre {

enum class NodeKind { Mention, Sentence };

// Mention nodes are indexed by (entity, mention) flattened in document
// order; sentence nodes by sentence index. Flat row = mention index, or
// n_mentions + sentence index.
struct NodeId {
    NodeKind kind = NodeKind::Mention;
    int index = 0;

    bool operator==(const NodeId&) const = default;
    auto operator<=>(const NodeId&) const = default;
};

enum class EdgeType : int {
    SentenceSentence = 0,
    SentenceMention = 1,
    MentionMention = 2,
    Coreference = 3,
};
constexpr int kNumEdgeTypes = 4;
constexpr std::array<EdgeType, 4> kAllEdgeTypes = {
    EdgeType::SentenceSentence, EdgeType::SentenceMention, EdgeType::MentionMention,
    EdgeType::Coreference};

const char* edge_type_name(EdgeType t);

// Undirected graph over mention and sentence nodes. Edges are stored once
// (a < b on flat ids); neighbor queries expand them symmetrically. No
// self-loops.
struct HetGraph {
    int n_mentions = 0;
    int n_sentences = 0;
    // Per mention node: owning entity, mention index within entity,
    // sentence index — lookups used all over the model.
    struct MentionInfo {
        int entity = 0;
        int mention = 0;
        int sentence = 0;
    };
    std::vector<MentionInfo> mention_info;
    // Prefix offsets: mention node of (entity e, mention k) = entity_offset[e] + k.
    std::vector<int> entity_offset;
    // Canonical edge lists per type, (a, b) flat ids with a < b, sorted.
    std::array<std::vector<std::pair<int, int>>, kNumEdgeTypes> edges;

    int n_nodes() const { return n_mentions + n_sentences; }
    int row_of(NodeId id) const {
        return id.kind == NodeKind::Mention ? id.index : n_mentions + id.index;
    }
    NodeId node_at(int row) const {
        return row < n_mentions ? NodeId{NodeKind::Mention, row}
                                : NodeId{NodeKind::Sentence, row - n_mentions};
    }
    int mention_row(int entity, int mention) const {
        return entity_offset[static_cast<std::size_t>(entity)] + mention;
    }
    int sentence_row(int sentence) const { return n_mentions + sentence; }
    bool contains(NodeId id) const {
        if (id.index < 0) return false;
        return id.kind == NodeKind::Mention ? id.index < n_mentions : id.index < n_sentences;
    }
};

// Pure construction; identical documents yield identical graphs.
HetGraph build_graph(const Document& doc);

// Neighbors of `node` over edges of type `etype`, ascending by flat id.
// Symmetric: b in neighbors(a, t) iff a in neighbors(b, t). Unknown node
// -> error.
std::vector<NodeId> neighbors(const HetGraph& graph, NodeId node, EdgeType etype);

// Flat-id adjacency per type (symmetric expansion of the stored edges),
// used by the graph convolution.
std::vector<std::vector<int>> adjacency(const HetGraph& graph, EdgeType etype);

}  // namespace docre
