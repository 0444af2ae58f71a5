#pragma once
// Minimal CSV emission helpers. All report files use a header row, comma
// separators and LF line endings; fields are quoted only when they need it.

#include <ostream>
#include <string>

namespace migtf::csv {

inline std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace migtf::csv
