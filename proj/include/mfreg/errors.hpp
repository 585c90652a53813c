#ifndef MFREG_ERRORS_HPP
#define MFREG_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfreg {

// Precondition or invariant violated by the caller.
class contract_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A formula was evaluated at a point where it is undefined (zero norm, sign(0) denominator).
class singularity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fewer data points than the computation needs.
class insufficient_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite parameter; carries the 1-based epoch.
class divergence_error : public std::runtime_error {
public:
    divergence_error(std::size_t epoch, const std::string& what)
        : std::runtime_error(what), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

// Malformed input file; carries the 1-based line number (0 = whole file).
class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, const std::string& what)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mfreg

#endif
