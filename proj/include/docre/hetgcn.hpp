#pragma once

#include <array>
#include <vector>

#include "docre/config.hpp"
#include "docre/docgraph.hpp"
#include "docre/tape.hpp"

namespace docre {

// One relational convolution layer: a self matrix, one matrix per edge
// type, and a bias.
struct GcnLayerParams {
    Parameter* w_self = nullptr;
    std::array<Parameter*, kNumEdgeTypes> w_type{};
    Parameter* b = nullptr;
};

std::vector<GcnLayerParams> create_gcn_params(ParamStore& store, const ModelConfig& cfg,
                                              Rng& rng);

struct BoundGcnLayer {
    Var w_self;
    std::array<Var, kNumEdgeTypes> w_type{};
    Var b;
};
std::vector<BoundGcnLayer> bind_gcn(Tape& tape, const std::vector<GcnLayerParams>& layers);

// Mean-normalized adjacency for one edge type: row u holds 1/|N_t(u)| at
// the neighbors of u, zero elsewhere (empty neighborhoods contribute
// nothing).
Tensor normalized_adjacency(const HetGraph& graph, EdgeType etype);

// Multi-hop convolution. inits is the n_nodes x d_enc matrix of initial
// node representations; the result concatenates inits with the layer
// outputs selected by cfg.gcn_concat, giving n_nodes x d1.
Var gcn_forward(Tape& tape, const HetGraph& graph, Var inits,
                const std::vector<BoundGcnLayer>& layers, const ModelConfig& cfg);

}  // namespace docre
