#include "docre/hetgcn.hpp"

namespace docre {

std::vector<GcnLayerParams> create_gcn_params(ParamStore& store, const ModelConfig& cfg,
                                              Rng& rng) {
    std::vector<GcnLayerParams> layers;
    const auto out_dim = static_cast<std::size_t>(cfg.gcn_out_dim());
    std::size_t in_dim = static_cast<std::size_t>(cfg.d_enc());
    for (int l = 0; l < cfg.gcn_layers; ++l) {
        const std::string prefix = "gcn." + std::to_string(l);
        GcnLayerParams layer;
        layer.w_self = &store.create_glorot(prefix + ".w_self", in_dim, out_dim, rng);
        for (int t = 0; t < kNumEdgeTypes; ++t)
            layer.w_type[static_cast<std::size_t>(t)] = &store.create_glorot(
                prefix + ".w_" + edge_type_name(static_cast<EdgeType>(t)), in_dim, out_dim, rng);
        layer.b = &store.create(prefix + ".b", 1, out_dim);
        layers.push_back(layer);
        in_dim = out_dim;
    }
    return layers;
}

std::vector<BoundGcnLayer> bind_gcn(Tape& tape, const std::vector<GcnLayerParams>& layers) {
    std::vector<BoundGcnLayer> bound;
    for (const auto& layer : layers) {
        BoundGcnLayer b;
        b.w_self = tape.param(*layer.w_self);
        for (int t = 0; t < kNumEdgeTypes; ++t)
            b.w_type[static_cast<std::size_t>(t)] =
                tape.param(*layer.w_type[static_cast<std::size_t>(t)]);
        b.b = tape.param(*layer.b);
        bound.push_back(b);
    }
    return bound;
}

Tensor normalized_adjacency(const HetGraph& graph, EdgeType etype) {
    const auto n = static_cast<std::size_t>(graph.n_nodes());
    Tensor a(n, n);
    const auto adj = adjacency(graph, etype);
    for (std::size_t u = 0; u < n; ++u) {
        if (adj[u].empty()) continue;
        const double w = 1.0 / static_cast<double>(adj[u].size());
        for (int v : adj[u]) a.at(u, static_cast<std::size_t>(v)) = w;
    }
    return a;
}

Var gcn_forward(Tape& tape, const HetGraph& graph, Var inits,
                const std::vector<BoundGcnLayer>& layers, const ModelConfig& cfg) {
    std::array<Var, kNumEdgeTypes> adj{};
    for (int t = 0; t < kNumEdgeTypes; ++t)
        adj[static_cast<std::size_t>(t)] =
            tape.constant(normalized_adjacency(graph, static_cast<EdgeType>(t)));

    std::vector<Var> pieces = {inits};
    Var x = inits;
    for (const auto& layer : layers) {
        Var acc = tape.matmul(x, layer.w_self);
        for (int t = 0; t < kNumEdgeTypes; ++t) {
            Var messages = tape.matmul(adj[static_cast<std::size_t>(t)], x);
            acc = tape.add(acc, tape.matmul(messages, layer.w_type[static_cast<std::size_t>(t)]));
        }
        x = tape.relu(tape.add_row(acc, layer.b));
        pieces.push_back(x);
    }
    if (cfg.gcn_concat == "skip_last") pieces.pop_back();
    return tape.concat_cols(pieces);
}

}  // namespace docre
