#pragma once

#include <map>
#include <string>
#include <vector>

// Flat key=value config with [section] headers. Blank lines and lines
// starting with '#' or ';' are ignored; whitespace around keys and values
// is trimmed. Keys before the first header land in the unnamed section "".
// Duplicate keys within a section: the last one wins.

namespace nc {

struct KvSection {
    std::string name;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
};

struct KvFile {
    std::vector<KvSection> sections;  // in file order

    const KvSection* find(const std::string& name) const;
};

// Throws std::runtime_error with a line number on malformed input.
KvFile parse_kv_text(const std::string& text);
KvFile parse_kv_file(const std::string& path);

} // namespace nc
