#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace jmvd {

/// Shape mismatch (non-square input, wrong sizes).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the operation's domain (non-finite entries, non-Hermitian, sigma <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed family/loop document. `where` is a JSON-pointer-like location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(where) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Singular values too close to each other (or to zero) for the gauge formulas.
/// `first`/`second` are the offending column indices; second == first for sigma_n ~ 0.
class NearDegenerate : public std::runtime_error {
public:
    NearDegenerate(int first, int second, const std::string& what)
        : std::runtime_error(what), first_(first), second_(second) {}
    std::pair<int, int> indices() const noexcept { return {first_, second_}; }

private:
    int first_;
    int second_;
};

/// Column overlap between consecutive frames fell below the correlation threshold.
class StepTooLarge : public std::runtime_error {
public:
    StepTooLarge(int column, double overlap, const std::string& what)
        : std::runtime_error(what), column_(column), overlap_(overlap) {}
    int column() const noexcept { return column_; }
    double overlap() const noexcept { return overlap_; }

private:
    int column_;
    double overlap_;
};

/// Step size underflow along a loop; carries the last accepted loop parameter.
class ContinuationFailed : public std::runtime_error {
public:
    ContinuationFailed(double last_t, const std::string& what)
        : std::runtime_error(what), last_t_(last_t) {}
    double last_t() const noexcept { return last_t_; }

private:
    double last_t_;
};

/// A per-step phase increment too large to unwrap unambiguously.
class RefinementNeeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition (e.g. open trace).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace jmvd
