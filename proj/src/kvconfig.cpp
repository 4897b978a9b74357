#include "nc/kvconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nc {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::string KvSection::get(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

const KvSection* KvFile::find(const std::string& name) const {
    for (const KvSection& section : sections)
        if (section.name == name) return &section;
    return nullptr;
}

KvFile parse_kv_text(const std::string& text) {
    KvFile file;
    KvSection current;  // unnamed preamble
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("config line " + std::to_string(line_no) + ": " + what);
    };
    auto commit = [&]() {
        if (!current.name.empty() || !current.values.empty())
            file.sections.push_back(std::move(current));
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') fail("unterminated section header");
            const std::string name = trim(stripped.substr(1, stripped.size() - 2));
            if (name.empty()) fail("empty section name");
            commit();
            current = KvSection{name, {}};
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) fail("expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        if (key.empty()) fail("empty key");
        current.values[key] = trim(stripped.substr(eq + 1));
    }
    commit();
    return file;
}

KvFile parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_kv_text(buffer.str());
}

} // namespace nc
