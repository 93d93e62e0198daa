#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gfa {

// Every failure surfaced by the library carries a short machine-readable code
// next to the human message; the CLI turns both into its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

inline void require(bool condition, const char* code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

}  // namespace gfa
