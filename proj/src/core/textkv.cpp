#include "textkv.hpp"

#include <sstream>

namespace minv {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<KvEntry> parse_kv_text(const std::string& text, Errc on_error) {
    std::vector<KvEntry> out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', on_error,
                    "line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            require(!section.empty(), on_error,
                    "line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        std::size_t eq = line.find('=');
        require(eq != std::string::npos, on_error,
                "line " + std::to_string(lineno) + ": expected key = value");
        KvEntry e;
        e.section = section;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        require(!e.key.empty(), on_error, "line " + std::to_string(lineno) + ": empty key");
        out.push_back(std::move(e));
    }
    return out;
}

std::string format_kv_text(const std::vector<KvEntry>& entries) {
    std::ostringstream os;
    std::string section;
    bool first = true;
    for (const KvEntry& e : entries) {
        if (e.section != section || first) {
            if (!first) os << '\n';
            os << '[' << e.section << "]\n";
            section = e.section;
        }
        os << e.key << " = " << e.value << '\n';
        first = false;
    }
    return os.str();
}

} // namespace minv
