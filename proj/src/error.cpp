#include "xborder/error.hpp"

namespace xborder {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::non_convergence: return "NonConvergence";
    case ErrorKind::derivative_vanished: return "DerivativeVanished";
    case ErrorKind::no_bracket: return "NoBracket";
    case ErrorKind::non_positive_rate: return "NonPositiveRate";
    case ErrorKind::insufficient_liquidity: return "InsufficientLiquidity";
    case ErrorKind::range_exceeded: return "RangeExceeded";
    case ErrorKind::no_venue_for_pair: return "NoVenueForPair";
    case ErrorKind::empty_candidates: return "EmptyCandidates";
    case ErrorKind::malformed_row: return "MalformedRow";
    case ErrorKind::empty_series: return "EmptySeries";
    case ErrorKind::empty_report: return "EmptyReport";
    case ErrorKind::io: return "IoError";
    }
    return "Unknown";
}

} // namespace xborder
