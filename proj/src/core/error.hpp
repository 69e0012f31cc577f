#pragma once

#include <stdexcept>
#include <string>

namespace minv {

// Error categories. These map 1:1 onto the C API status codes and drive the
// CLI exit codes (usage/config -> 2, I/O family -> 3, numeric -> 4).
enum class Errc {
    invalid_argument = 1,
    shape_mismatch   = 2,
    numeric          = 3,
    io               = 4,
    format           = 5,
    version          = 6,
    checksum         = 7,
    truncated        = 8,
    config           = 9,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
    throw Error(code, msg);
}

inline void require(bool cond, Errc code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

} // namespace minv
