#ifndef GLYCAST_ERRORS_HPP
#define GLYCAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace glycast {

/// Malformed input file; line is 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }

private:
    std::string file_;
    int line_;
};

class MissingVariableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Embedding or selection produced no usable rows.
class EmptySetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fewer rows than features (or rank failure with lambda = 0).
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver hit its iteration cap; carries the final residual.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

} // namespace glycast

#endif
