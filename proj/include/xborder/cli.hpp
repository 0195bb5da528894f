#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace xborder::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

/// FX file used by `--config default` and by quote/check when --fx is absent.
std::filesystem::path default_fx_path();

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace xborder::cli
