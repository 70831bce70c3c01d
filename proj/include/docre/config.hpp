#pragma once

#include <cstdint>
#include <string>

namespace docre {

// All knobs in one flat struct; persisted as key=value lines, overridable
// through DOCRE_* environment variables and CLI flags.
struct ModelConfig {
    // encoder
    int word_dim = 100;
    int type_dim = 20;
    int coref_dim = 20;
    int hidden = 128;  // per direction
    double dropout = 0.5;
    bool dropout_tokens = true;
    bool dropout_mlp = true;
    bool lowercase = true;
    std::string head_word = "first";  // first | last
    bool sentence_reset = true;       // false: document-contiguous recurrence
    int coref_table = 128;            // rows incl. the reserved none row

    // graph convolution
    int gcn_layers = 2;
    int gcn_dim = 0;               // 0 -> d_enc
    std::string gcn_concat = "all";  // all | skip_last

    // document attention
    int d_model = 0;  // 0 -> d_enc
    int d2 = 0;       // 0 -> d_enc

    // classifier
    int mlp_hidden = 0;  // 0 -> rep_dim / 2

    // path selection
    int k = 3;

    // training
    int batch_size = 12;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    int epochs = 200;
    int eval_every = 5;
    std::uint64_t seed = 1;
    double clip_norm = 5.0;
    int patience = 20;        // evaluations without dev-F1 improvement
    double stop_at_f1 = 0.0;  // early exit once dev F1 reaches this (0 = off)
    double neg_ratio = 1.0;   // fraction of relation-less pairs kept per doc
    int min_freq = 1;
    double min_candidate_prob = 0.0;  // drop candidates below this at eval
    std::string word_vectors;         // optional pretrained embedding file

    int d_enc() const { return 2 * hidden; }
    int token_dim() const { return word_dim + type_dim + coref_dim; }
    int gcn_out_dim() const { return gcn_dim > 0 ? gcn_dim : d_enc(); }
    int concat_layers() const {
        return gcn_concat == "skip_last" ? gcn_layers - 1 : gcn_layers;
    }
    int d1() const { return d_enc() + concat_layers() * gcn_out_dim(); }
    int d2_eff() const { return d2 > 0 ? d2 : d_enc(); }
    int d_model_eff() const { return d_model > 0 ? d_model : d_enc(); }
    int rep_dim() const { return 2 * d1() + 2 * d2_eff(); }
    int mlp_hidden_eff() const { return mlp_hidden > 0 ? mlp_hidden : rep_dim() / 2; }

    void validate() const;
};

// key=value lines; '#' starts a comment. Unknown keys -> error.
ModelConfig parse_config_text(const std::string& text);
ModelConfig load_config(const std::string& path);
// Canonical serialization (fixed key order).
std::string serialize_config(const ModelConfig& cfg);
// Applies DOCRE_<UPPERCASE_KEY> environment overrides.
void apply_env_overrides(ModelConfig& cfg);
// Sets a single key (shared by file parser, env and CLI overrides).
void set_config_key(ModelConfig& cfg, const std::string& key, const std::string& value);

}  // namespace docre
