#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textkv.hpp"

namespace minv {

// Resolved run configuration: a fixed schema of section.key entries with
// defaults, overridden by a config file and then by command-line settings.
// Unknown keys are rejected so typos fail loudly.
class Config {
public:
    Config(); // defaults

    void load_file(const std::string& path);
    void load_text(const std::string& text, const std::string& origin);
    void set(const std::string& dotted_key, const std::string& value);

    bool has(const std::string& dotted_key) const;
    std::string get(const std::string& dotted_key) const;
    double get_double(const std::string& dotted_key) const;
    int get_int(const std::string& dotted_key) const;
    std::uint64_t get_u64(const std::string& dotted_key) const;
    bool get_bool(const std::string& dotted_key) const;
    std::vector<std::int32_t> get_int_list(const std::string& dotted_key) const; // empty ok

    // full resolved configuration, stable order, parseable by load_file
    std::string echo_text() const;
    void write_echo(const std::string& path) const;

    // schema with defaults and per-key descriptions
    static std::string defaults_text();

private:
    struct Entry {
        std::string section, key, value, comment;
    };
    std::vector<Entry> entries_;
    Entry* find(const std::string& dotted_key);
    const Entry* find(const std::string& dotted_key) const;
};

} // namespace minv
