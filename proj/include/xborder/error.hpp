#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xborder {

enum class ErrorKind {
    invalid_argument,
    // numerics
    non_convergence,
    derivative_vanished,
    no_bracket,
    // amm
    non_positive_rate,
    insufficient_liquidity,
    range_exceeded,
    // router
    no_venue_for_pair,
    empty_candidates,
    // market data / reports
    malformed_row,
    empty_series,
    empty_report,
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace xborder
