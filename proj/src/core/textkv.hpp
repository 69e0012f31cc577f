#pragma once

#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace minv {

// Flat sectioned key-value text:
//   [section]
//   key = value
// '#' starts a comment, blank lines ignored, order preserved.
struct KvEntry {
    std::string section;
    std::string key;
    std::string value;
};

std::vector<KvEntry> parse_kv_text(const std::string& text, Errc on_error = Errc::config);
std::string format_kv_text(const std::vector<KvEntry>& entries);

std::string trim(const std::string& s);

} // namespace minv
