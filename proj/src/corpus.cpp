#include "docre/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "docre/errors.hpp"
#include "json.hpp"

using json = nlohmann::ordered_json;

namespace docre {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

static std::string lower_ascii(const std::string& s) {
    std::string r = s;
    for (auto& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return r;
}

int Vocab::word_id(const std::string& token) const {
    const std::string key = lowercase ? lower_ascii(token) : token;
    auto it = word_to_id.find(key);
    return it == word_to_id.end() ? kUnkId : it->second;
}

int Vocab::relation_id(const std::string& code) const {
    auto it = relation_to_id.find(code);
    return it == relation_to_id.end() ? -1 : it->second;
}

int Vocab::type_id(const std::string& type) const {
    auto it = type_to_id.find(type);
    return it == type_to_id.end() ? -1 : it->second;
}

std::vector<std::string> Vocab::relation_codes() const {
    std::vector<std::string> codes(relation_to_id.size());
    for (const auto& [code, id] : relation_to_id) codes[static_cast<std::size_t>(id)] = code;
    return codes;
}

std::vector<std::string> validate_document(const Document& doc) {
    std::vector<std::string> out;
    const int n_sents = static_cast<int>(doc.sentences.size());
    if (n_sents == 0) out.push_back("document has no sentences");
    for (int s = 0; s < n_sents; ++s) {
        if (doc.sentences[static_cast<std::size_t>(s)].empty())
            out.push_back("sentence " + std::to_string(s) + " is empty");
    }
    for (std::size_t ei = 0; ei < doc.entities.size(); ++ei) {
        const Entity& e = doc.entities[ei];
        if (e.mentions.empty()) {
            out.push_back("entity " + std::to_string(ei) + " has no mentions");
            continue;
        }
        for (std::size_t mi = 0; mi < e.mentions.size(); ++mi) {
            const Mention& m = e.mentions[mi];
            const std::string where =
                "entity " + std::to_string(ei) + " mention " + std::to_string(mi);
            if (m.sentence_index < 0 || m.sentence_index >= n_sents) {
                out.push_back(where + ": sentence index " + std::to_string(m.sentence_index) +
                              " out of range");
                continue;
            }
            const int len =
                static_cast<int>(doc.sentences[static_cast<std::size_t>(m.sentence_index)].size());
            if (m.start < 0 || m.start >= m.end)
                out.push_back(where + ": bad span [" + std::to_string(m.start) + "," +
                              std::to_string(m.end) + ")");
            else if (m.end > len)
                out.push_back(where + ": span end " + std::to_string(m.end) +
                              " exceeds sentence length " + std::to_string(len));
        }
        for (std::size_t mi = 1; mi < e.mentions.size(); ++mi) {
            const Mention& a = e.mentions[mi - 1];
            const Mention& b = e.mentions[mi];
            if (std::tie(a.sentence_index, a.start) > std::tie(b.sentence_index, b.start))
                out.push_back("entity " + std::to_string(ei) + ": mentions not sorted at index " +
                              std::to_string(mi));
        }
    }
    const int n_ents = static_cast<int>(doc.entities.size());
    for (std::size_t fi = 0; fi < doc.facts.size(); ++fi) {
        const RelationFact& f = doc.facts[fi];
        const std::string where = "fact " + std::to_string(fi);
        if (f.head < 0 || f.head >= n_ents)
            out.push_back(where + ": head index " + std::to_string(f.head) + " out of range");
        if (f.tail < 0 || f.tail >= n_ents)
            out.push_back(where + ": tail index " + std::to_string(f.tail) + " out of range");
        if (f.head == f.tail) out.push_back(where + ": head == tail");
        for (int ev : f.evidence) {
            if (ev < 0 || ev >= n_sents)
                out.push_back(where + ": evidence sentence " + std::to_string(ev) +
                              " out of range");
        }
    }
    return out;
}

static Document document_from_json(const json& jd, const std::string& where) {
    Document doc;
    if (!jd.is_object()) throw ValidationError(where + ": document is not a JSON object");
    if (jd.contains("title")) doc.title = jd.at("title").get<std::string>();

    const char* sent_key = jd.contains("sents") ? "sents" : "sentences";
    if (!jd.contains(sent_key)) throw ValidationError(where + ": missing 'sents'");
    for (const auto& js : jd.at(sent_key)) {
        std::vector<std::string> sent;
        for (const auto& jt : js) sent.push_back(jt.get<std::string>());
        doc.sentences.push_back(std::move(sent));
    }

    const char* ent_key = jd.contains("vertexSet") ? "vertexSet" : "entities";
    if (jd.contains(ent_key)) {
        for (const auto& je : jd.at(ent_key)) {
            Entity ent;
            const auto& mentions = je.is_object() && je.contains("mentions") ? je.at("mentions") : je;
            if (je.is_object() && je.contains("type"))
                ent.entity_type = je.at("type").get<std::string>();
            for (const auto& jm : mentions) {
                Mention m;
                if (jm.contains("sent_id"))
                    m.sentence_index = jm.at("sent_id").get<int>();
                else
                    m.sentence_index = jm.at("sent").get<int>();
                if (jm.contains("pos")) {
                    m.start = jm.at("pos").at(0).get<int>();
                    m.end = jm.at("pos").at(1).get<int>();
                } else {
                    m.start = jm.at("start").get<int>();
                    m.end = jm.at("end").get<int>();
                }
                if (jm.contains("name"))
                    m.surface = jm.at("name").get<std::string>();
                else if (jm.contains("surface"))
                    m.surface = jm.at("surface").get<std::string>();
                if (ent.entity_type.empty() && jm.contains("type"))
                    ent.entity_type = jm.at("type").get<std::string>();
                ent.mentions.push_back(std::move(m));
            }
            std::stable_sort(ent.mentions.begin(), ent.mentions.end(),
                             [](const Mention& a, const Mention& b) {
                                 return std::tie(a.sentence_index, a.start, a.end) <
                                        std::tie(b.sentence_index, b.start, b.end);
                             });
            doc.entities.push_back(std::move(ent));
        }
    }

    const char* fact_key = jd.contains("labels") ? "labels" : "facts";
    if (jd.contains(fact_key)) {
        for (const auto& jf : jd.at(fact_key)) {
            RelationFact f;
            f.head = jf.contains("h") ? jf.at("h").get<int>() : jf.at("head").get<int>();
            f.tail = jf.contains("t") ? jf.at("t").get<int>() : jf.at("tail").get<int>();
            f.relation = jf.contains("r") ? jf.at("r").get<std::string>()
                                          : jf.at("relation").get<std::string>();
            if (jf.contains("evidence"))
                for (const auto& je : jf.at("evidence")) f.evidence.push_back(je.get<int>());
            doc.facts.push_back(std::move(f));
        }
    }
    return doc;
}

Corpus parse_corpus(const std::string& json_text, const std::string& source,
                    const std::optional<Vocab>& vocab) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ": JSON parse error: " + e.what());
    }
    if (!root.is_array()) throw ValidationError(source + ": corpus root must be a JSON array");

    Corpus corpus;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string where = source + ": document " + std::to_string(i);
        Document doc;
        try {
            doc = document_from_json(root[i], where);
        } catch (const json::exception& e) {
            throw ValidationError(where + ": schema error: " + e.what());
        }
        auto violations = validate_document(doc);
        if (!violations.empty())
            throw ValidationError(where + " (" + doc.title + "): " + violations.front());
        if (vocab) {
            for (std::size_t fi = 0; fi < doc.facts.size(); ++fi) {
                if (vocab->relation_id(doc.facts[fi].relation) < 0)
                    throw ValidationError(where + ": fact " + std::to_string(fi) +
                                          ": relation '" + doc.facts[fi].relation +
                                          "' not in vocab inventory");
            }
        }
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

Corpus load_corpus(const std::string& path, const std::optional<Vocab>& vocab) {
    return parse_corpus(read_text_file(path), path, vocab);
}

static json document_to_json(const Document& doc) {
    json jd;
    jd["title"] = doc.title;
    jd["sents"] = doc.sentences;
    json ents = json::array();
    for (const auto& e : doc.entities) {
        json je = json::array();
        for (const auto& m : e.mentions) {
            json jm;
            jm["name"] = m.surface;
            jm["sent_id"] = m.sentence_index;
            jm["pos"] = {m.start, m.end};
            jm["type"] = e.entity_type;
            je.push_back(std::move(jm));
        }
        ents.push_back(std::move(je));
    }
    jd["vertexSet"] = std::move(ents);
    json labels = json::array();
    for (const auto& f : doc.facts) {
        json jf;
        jf["h"] = f.head;
        jf["t"] = f.tail;
        jf["r"] = f.relation;
        jf["evidence"] = f.evidence;
        labels.push_back(std::move(jf));
    }
    jd["labels"] = std::move(labels);
    return jd;
}

std::string serialize_corpus(const Corpus& corpus) {
    json root = json::array();
    for (const auto& doc : corpus) root.push_back(document_to_json(doc));
    return root.dump();
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    write_text_file(path, serialize_corpus(corpus));
}

Vocab build_vocab(const Corpus& corpus, int min_freq, bool lowercase) {
    if (corpus.empty()) throw ValidationError("build_vocab: empty corpus");
    if (min_freq < 1) throw ValidationError("build_vocab: min_freq must be >= 1");

    Vocab vocab;
    vocab.min_freq = min_freq;
    vocab.lowercase = lowercase;
    vocab.word_to_id["<pad>"] = Vocab::kPadId;
    vocab.word_to_id["<unk>"] = Vocab::kUnkId;

    std::unordered_map<std::string, std::int64_t> freq;
    std::map<std::string, int> relations;
    std::map<std::string, int> types;
    for (const auto& doc : corpus) {
        for (const auto& sent : doc.sentences)
            for (const auto& tok : sent) ++freq[lowercase ? lower_ascii(tok) : tok];
        for (const auto& f : doc.facts) relations.emplace(f.relation, 0);
        for (const auto& e : doc.entities)
            if (!e.entity_type.empty()) types.emplace(e.entity_type, 0);
    }

    // Deterministic id assignment: by descending frequency, then token.
    std::vector<std::pair<std::string, std::int64_t>> by_freq(freq.begin(), freq.end());
    std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    int next = 2;
    for (const auto& [tok, n] : by_freq) {
        if (n < min_freq) continue;
        if (tok == "<pad>" || tok == "<unk>") continue;
        vocab.word_to_id[tok] = next++;
    }

    int rid = 0;
    for (auto& [code, id] : relations) id = rid++;
    vocab.relation_to_id = std::move(relations);
    int tid = 0;
    for (auto& [name, id] : types) id = tid++;
    vocab.type_to_id = std::move(types);
    return vocab;
}

std::string serialize_vocab(const Vocab& vocab) {
    json j;
    j["min_freq"] = vocab.min_freq;
    j["lowercase"] = vocab.lowercase;
    j["words"] = vocab.word_to_id;
    j["relations"] = vocab.relation_to_id;
    j["types"] = vocab.type_to_id;
    return j.dump();
}

Vocab parse_vocab(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("vocab: JSON parse error: ") + e.what());
    }
    Vocab vocab;
    vocab.min_freq = j.at("min_freq").get<int>();
    vocab.lowercase = j.at("lowercase").get<bool>();
    vocab.word_to_id = j.at("words").get<std::map<std::string, int>>();
    vocab.relation_to_id = j.at("relations").get<std::map<std::string, int>>();
    vocab.type_to_id = j.at("types").get<std::map<std::string, int>>();
    return vocab;
}

void save_vocab(const Vocab& vocab, const std::string& path) {
    write_text_file(path, serialize_vocab(vocab));
}

Vocab load_vocab(const std::string& path) { return parse_vocab(read_text_file(path)); }

}  // namespace docre
