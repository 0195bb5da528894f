#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace xborder::acceptance {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    /// Data-dependent checks report but do not decide the exit status.
    bool gating = true;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    std::filesystem::path fx_path; // empty: dataset checks are skipped and fail
    unsigned threads = 0;
    unsigned property_seed = 20201102;
};

/// Runs every check in id order.
std::vector<CheckResult> run_all(const Options& opts);

/// Dataset-free solver property checks only.
CheckResult check_solver_properties(unsigned seed);

/// "PASS  3  name: detail (0.12 s)" style single line.
std::string format_line(const CheckResult& r);

bool gating_passed(const std::vector<CheckResult>& results);

} // namespace xborder::acceptance
