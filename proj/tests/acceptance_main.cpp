#include <iostream>

#include "xborder/acceptance.hpp"

// Usage: xborder_acceptance [fx.csv]
int main(int argc, char** argv) {
    xborder::acceptance::Options opts;
    if (argc > 1) opts.fx_path = argv[1];
    const auto results = xborder::acceptance::run_all(opts);
    for (const auto& r : results) std::cout << xborder::acceptance::format_line(r) << '\n';
    const bool ok = xborder::acceptance::gating_passed(results);
    std::cout << (ok ? "acceptance: all gating criteria passed" : "acceptance: gating criteria failed") << '\n';
    return ok ? 0 : 1;
}
