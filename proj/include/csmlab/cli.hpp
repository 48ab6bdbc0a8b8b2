// The `csmlab` command line: runs, verification, sweeps, plots, selftest.
//
// Exit codes: 0 success or pass, 2 validation error, 3 numerical abort
// (CFL or NaN), 4 verification failure.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "csmlab/experiment_io.hpp"

namespace csmlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerification = 4;

int run_cli(int argc, char** argv);

/// Sets a dotted key path in a config document. A bare params field name
/// ("nu") is shorthand for "params.nu".
Json apply_override(Json doc, const std::string& key, const Json& value);

/// Creates a fresh, uniquely named directory below `root`, or below
/// $CSMLAB_OUT_DIR (falling back to ./csmlab-out) when `root` is empty.
std::filesystem::path make_run_dir(const std::optional<std::filesystem::path>& root, const std::string& label);

}  // namespace csmlab
