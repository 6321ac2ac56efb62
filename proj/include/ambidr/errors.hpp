#pragma once

#include <stdexcept>
#include <string>

namespace ambidr {

// Error categories map one-to-one onto CLI exit codes (see exit_code()).

/// Bad user input: malformed files, out-of-range ids, non-finite data.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input, carrying the 1-based line number.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t line)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Parameter values outside their documented domain.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal contract was violated; indicates a bug, not bad input.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Wraps any of the above with the name of the pipeline stage that raised it.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what, int code)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), code_(code) {}

    const std::string& stage() const noexcept { return stage_; }
    int code() const noexcept { return code_; }

private:
    std::string stage_;
    int code_;
};

inline int exit_code(const std::exception& e) noexcept {
    if (auto* s = dynamic_cast<const StageError*>(&e)) return s->code();
    if (dynamic_cast<const InputError*>(&e)) return 2;
    if (dynamic_cast<const ConfigError*>(&e)) return 3;
    if (dynamic_cast<const InvariantError*>(&e)) return 4;
    return 4;
}

inline void require(bool cond, const char* what) {
    if (!cond) throw InvariantError(what);
}

} // namespace ambidr
