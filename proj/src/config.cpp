#include "docre/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "docre/corpus.hpp"
#include "docre/errors.hpp"

namespace docre {

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ValidationError("config: bad boolean for " + key + ": " + v);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "word_dim", "type_dim", "coref_dim", "hidden", "dropout", "dropout_tokens",
        "dropout_mlp", "lowercase", "head_word", "sentence_reset", "coref_table",
        "gcn_layers", "gcn_dim", "gcn_concat", "d_model", "d2", "mlp_hidden", "k",
        "batch_size", "lr", "weight_decay", "epochs", "eval_every", "seed", "clip_norm",
        "patience", "stop_at_f1", "neg_ratio", "min_freq", "min_candidate_prob",
        "word_vectors"};
    return keys;
}

}  // namespace

void set_config_key(ModelConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "word_dim") cfg.word_dim = std::stoi(value);
        else if (key == "type_dim") cfg.type_dim = std::stoi(value);
        else if (key == "coref_dim") cfg.coref_dim = std::stoi(value);
        else if (key == "hidden") cfg.hidden = std::stoi(value);
        else if (key == "dropout") cfg.dropout = std::stod(value);
        else if (key == "dropout_tokens") cfg.dropout_tokens = parse_bool(value, key);
        else if (key == "dropout_mlp") cfg.dropout_mlp = parse_bool(value, key);
        else if (key == "lowercase") cfg.lowercase = parse_bool(value, key);
        else if (key == "head_word") cfg.head_word = value;
        else if (key == "sentence_reset") cfg.sentence_reset = parse_bool(value, key);
        else if (key == "coref_table") cfg.coref_table = std::stoi(value);
        else if (key == "gcn_layers") cfg.gcn_layers = std::stoi(value);
        else if (key == "gcn_dim") cfg.gcn_dim = std::stoi(value);
        else if (key == "gcn_concat") cfg.gcn_concat = value;
        else if (key == "d_model") cfg.d_model = std::stoi(value);
        else if (key == "d2") cfg.d2 = std::stoi(value);
        else if (key == "mlp_hidden") cfg.mlp_hidden = std::stoi(value);
        else if (key == "k") cfg.k = std::stoi(value);
        else if (key == "batch_size") cfg.batch_size = std::stoi(value);
        else if (key == "lr") cfg.lr = std::stod(value);
        else if (key == "weight_decay") cfg.weight_decay = std::stod(value);
        else if (key == "epochs") cfg.epochs = std::stoi(value);
        else if (key == "eval_every") cfg.eval_every = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "clip_norm") cfg.clip_norm = std::stod(value);
        else if (key == "patience") cfg.patience = std::stoi(value);
        else if (key == "stop_at_f1") cfg.stop_at_f1 = std::stod(value);
        else if (key == "neg_ratio") cfg.neg_ratio = std::stod(value);
        else if (key == "min_freq") cfg.min_freq = std::stoi(value);
        else if (key == "min_candidate_prob") cfg.min_candidate_prob = std::stod(value);
        else if (key == "word_vectors") cfg.word_vectors = value;
        else throw ValidationError("config: unknown key: " + key);
    } catch (const std::invalid_argument&) {
        throw ValidationError("config: bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw ValidationError("config: value out of range for " + key + ": " + value);
    }
}

ModelConfig parse_config_text(const std::string& text) {
    ModelConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: line " + std::to_string(lineno) +
                                  " is not key=value: " + line);
        set_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ModelConfig load_config(const std::string& path) {
    return parse_config_text(read_text_file(path));
}

std::string serialize_config(const ModelConfig& cfg) {
    std::ostringstream out;
    out << "word_dim=" << cfg.word_dim << "\n";
    out << "type_dim=" << cfg.type_dim << "\n";
    out << "coref_dim=" << cfg.coref_dim << "\n";
    out << "hidden=" << cfg.hidden << "\n";
    out << "dropout=" << cfg.dropout << "\n";
    out << "dropout_tokens=" << (cfg.dropout_tokens ? 1 : 0) << "\n";
    out << "dropout_mlp=" << (cfg.dropout_mlp ? 1 : 0) << "\n";
    out << "lowercase=" << (cfg.lowercase ? 1 : 0) << "\n";
    out << "head_word=" << cfg.head_word << "\n";
    out << "sentence_reset=" << (cfg.sentence_reset ? 1 : 0) << "\n";
    out << "coref_table=" << cfg.coref_table << "\n";
    out << "gcn_layers=" << cfg.gcn_layers << "\n";
    out << "gcn_dim=" << cfg.gcn_dim << "\n";
    out << "gcn_concat=" << cfg.gcn_concat << "\n";
    out << "d_model=" << cfg.d_model << "\n";
    out << "d2=" << cfg.d2 << "\n";
    out << "mlp_hidden=" << cfg.mlp_hidden << "\n";
    out << "k=" << cfg.k << "\n";
    out << "batch_size=" << cfg.batch_size << "\n";
    out << "lr=" << cfg.lr << "\n";
    out << "weight_decay=" << cfg.weight_decay << "\n";
    out << "epochs=" << cfg.epochs << "\n";
    out << "eval_every=" << cfg.eval_every << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "clip_norm=" << cfg.clip_norm << "\n";
    out << "patience=" << cfg.patience << "\n";
    out << "stop_at_f1=" << cfg.stop_at_f1 << "\n";
    out << "neg_ratio=" << cfg.neg_ratio << "\n";
    out << "min_freq=" << cfg.min_freq << "\n";
    out << "min_candidate_prob=" << cfg.min_candidate_prob << "\n";
    out << "word_vectors=" << cfg.word_vectors << "\n";
    return out.str();
}

void apply_env_overrides(ModelConfig& cfg) {
    for (const std::string& key : known_keys()) {
        std::string env_name = "DOCRE_";
        for (char c : key) env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (const char* v = std::getenv(env_name.c_str())) set_config_key(cfg, key, v);
    }
    cfg.validate();
}

void ModelConfig::validate() const {
    if (word_dim < 1 || type_dim < 1 || coref_dim < 1 || hidden < 1)
        throw ValidationError("config: embedding/hidden dims must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ValidationError("config: dropout must be in [0,1)");
    if (head_word != "first" && head_word != "last")
        throw ValidationError("config: head_word must be first|last");
    if (gcn_layers < 1) throw ValidationError("config: gcn_layers must be >= 1");
    if (gcn_concat != "all" && gcn_concat != "skip_last")
        throw ValidationError("config: gcn_concat must be all|skip_last");
    // Attention queries are raw encoder states (no query projection), so
    // the key width is pinned to d_enc; d_model only varies the scale.
    if (d_model > 0 && d_model != d_enc())
        throw ValidationError("config: d_model must equal 2*hidden (=" +
                              std::to_string(d_enc()) + "), got " + std::to_string(d_model));
    if (k < 1) throw ValidationError("config: k must be >= 1");
    if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
    // lr == 0 is allowed at the config level: the trainer then skips
    // optimizer steps (the optimizer itself rejects lr <= 0).
    if (lr < 0.0) throw ValidationError("config: lr must be >= 0");
    if (weight_decay < 0.0) throw ValidationError("config: weight_decay must be >= 0");
    if (neg_ratio < 0.0 || neg_ratio > 1.0)
        throw ValidationError("config: neg_ratio must be in [0,1]");
    if (coref_table < 2) throw ValidationError("config: coref_table must be >= 2");
}

}  // namespace docre
