#pragma once

#include <string>

#include "docre/errors.hpp"

namespace docre {

// The three reasoning route families between an entity pair.
enum class PathKind { Intra, Logical, Coref };

// Wire names used in JSONL records and reports.
inline const char* path_kind_name(PathKind k) {
    switch (k) {
        case PathKind::Intra: return "IR";
        case PathKind::Logical: return "LR";
        case PathKind::Coref: return "CR";
    }
    return "?";
}

inline PathKind path_kind_from_name(const std::string& s) {
    if (s == "IR") return PathKind::Intra;
    if (s == "LR") return PathKind::Logical;
    if (s == "CR") return PathKind::Coref;
    throw ValidationError("unknown reasoning type: " + s);
}

}  // namespace docre
