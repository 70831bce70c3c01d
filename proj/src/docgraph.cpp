#include "docre/docgraph.hpp"

#include <algorithm>

#include "docre/errors.hpp"

namespace docre {

const char* edge_type_name(EdgeType t) {
    switch (t) {
        case EdgeType::SentenceSentence: return "sentence_sentence";
        case EdgeType::SentenceMention: return "sentence_mention";
        case EdgeType::MentionMention: return "mention_mention";
        case EdgeType::Coreference: return "coreference";
    }
    return "?";
}

HetGraph build_graph(const Document& doc) {
    HetGraph g;
    g.n_sentences = static_cast<int>(doc.sentences.size());

    for (std::size_t e = 0; e < doc.entities.size(); ++e) {
        g.entity_offset.push_back(g.n_mentions);
        const auto& mentions = doc.entities[e].mentions;
        for (std::size_t k = 0; k < mentions.size(); ++k) {
            g.mention_info.push_back({static_cast<int>(e), static_cast<int>(k),
                                      mentions[k].sentence_index});
            ++g.n_mentions;
        }
    }

    auto& ss = g.edges[static_cast<int>(EdgeType::SentenceSentence)];
    for (int a = 0; a < g.n_sentences; ++a)
        for (int b = a + 1; b < g.n_sentences; ++b)
            ss.emplace_back(g.sentence_row(a), g.sentence_row(b));

    auto& sm = g.edges[static_cast<int>(EdgeType::SentenceMention)];
    for (int m = 0; m < g.n_mentions; ++m)
        sm.emplace_back(m, g.sentence_row(g.mention_info[static_cast<std::size_t>(m)].sentence));

    auto& mm = g.edges[static_cast<int>(EdgeType::MentionMention)];
    auto& co = g.edges[static_cast<int>(EdgeType::Coreference)];
    for (int a = 0; a < g.n_mentions; ++a) {
        for (int b = a + 1; b < g.n_mentions; ++b) {
            const auto& ia = g.mention_info[static_cast<std::size_t>(a)];
            const auto& ib = g.mention_info[static_cast<std::size_t>(b)];
            // The two rules are independent: same-entity mentions in one
            // sentence get both edges.
            if (ia.sentence == ib.sentence) mm.emplace_back(a, b);
            if (ia.entity == ib.entity) co.emplace_back(a, b);
        }
    }

    for (auto& list : g.edges) std::sort(list.begin(), list.end());
    return g;
}

std::vector<std::vector<int>> adjacency(const HetGraph& graph, EdgeType etype) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(graph.n_nodes()));
    for (const auto& [a, b] : graph.edges[static_cast<int>(etype)]) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
}

std::vector<NodeId> neighbors(const HetGraph& graph, NodeId node, EdgeType etype) {
    if (!graph.contains(node))
        throw ValidationError("neighbors: node not in graph (kind=" +
                              std::string(node.kind == NodeKind::Mention ? "mention" : "sentence") +
                              ", index=" + std::to_string(node.index) + ")");
    const int row = graph.row_of(node);
    std::vector<int> rows;
    for (const auto& [a, b] : graph.edges[static_cast<int>(etype)]) {
        if (a == row) rows.push_back(b);
        if (b == row) rows.push_back(a);
    }
    std::sort(rows.begin(), rows.end());
    std::vector<NodeId> out;
    out.reserve(rows.size());
    for (int r : rows) out.push_back(graph.node_at(r));
    return out;
}

}  // namespace docre
