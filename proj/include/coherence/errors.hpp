#ifndef COHERENCE_ERRORS_HPP
#define COHERENCE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace coherence {

// Thrown when an input violates a documented precondition or type invariant.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown by the state-file reader; carries the 1-based line of the offending token.
class parse_error : public std::runtime_error {
public:
    parse_error(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

} // namespace coherence

#endif
