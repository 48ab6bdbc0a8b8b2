// Configuration parsing, series persistence, checkpoints and run manifests.
//
// Configs and reports are JSON; series are CSV with a fixed header; checkpoints
// are a small binary container (see checkpoint_save).
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "csmlab/time_integration.hpp"
#include "json.hpp"

namespace csmlab {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = CSMLAB_VERSION;
inline constexpr const char* kSeriesHeader =
    "t,l2_sq,hs_sq,grad_hs_sq,forcing_hs_sq,cum_grad_hs,cum_forcing_hs,divergence_residual";
inline constexpr const char* kPairSeriesHeader = "t,phi_l2_sq,phi_grad_l2_sq,cum_nu_phi_grad,cum_forcing_hs";

/// Paired Navier-Stokes / corrected Smagorinsky configuration. Both runs share
/// every setting; u runs NSE, w runs CSM and starts from u(0) plus a seeded
/// perturbation of L2 norm epsilon.
struct PairConfig {
  RunConfig u;
  RunConfig w;
  double epsilon = 1e-3;
  std::uint64_t perturbation_seed = 7;
};

using AnyConfig = std::variant<RunConfig, PairConfig>;

// Configs ---------------------------------------------------------------------

/// Parses a config document. `"model": "Pair"` selects a PairConfig. Unknown
/// keys and invariant violations raise InvalidInput naming the key path.
AnyConfig parse_config(const Json& doc);
AnyConfig load_config(const std::filesystem::path& path);
RunConfig parse_run_config(const Json& doc);
PairConfig parse_pair_config(const Json& doc);

/// Fully defaulted echo of a config; parse_config(to_json(c)) reproduces c.
Json to_json(const RunConfig& config);
Json to_json(const PairConfig& config);
Json to_json(const AnyConfig& config);

/// Sorted keys, no whitespace, shortest round-trip floats.
std::string canonical_json(const Json& doc);
/// SHA-256 hex digest of canonical_json(doc).
std::string config_digest(const Json& doc);

// Series ----------------------------------------------------------------------

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(const std::string& text);

void write_series(const std::vector<DiagnosticRecord>& records, const std::filesystem::path& path);
std::vector<DiagnosticRecord> read_series(const std::filesystem::path& path);
void write_pair_series(const std::vector<PairRecord>& records, const std::filesystem::path& path);
std::vector<PairRecord> read_pair_series(const std::filesystem::path& path);

/// Generic numeric CSV with a header row; used by the plotter.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a column, or nullopt.
  std::optional<std::size_t> column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

// Checkpoints -----------------------------------------------------------------

struct Checkpoint {
  SimState state;
  std::string config_digest;
  double length = kTwoPi;
};

/// Layout: 8-byte magic "CSMLABCK", u32 LE format version, u32 LE header
/// length, a UTF-8 JSON header (n, length, t, step_index, config_digest and a
/// layout description), then 2 * n * n complex coefficients as little-endian
/// float64 pairs (re, im): the x component in row-major (ky, kx) storage
/// order, followed by the y component.
void checkpoint_save(const std::filesystem::path& path, const SimState& state, const std::string& config_digest);
/// Bit-exact inverse of checkpoint_save. Rejects bad magic, versions,
/// truncation and non-Hermitian payloads; a payload that violates the
/// divergence invariant is re-projected.
Checkpoint checkpoint_load(const std::filesystem::path& path);

// Manifests -------------------------------------------------------------------

struct RunManifest {
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::string started;
  std::string finished;
  std::uint64_t seed = 0;
  std::vector<std::string> output_paths;
  std::string status = "completed";  // "completed" or "aborted"
  std::string abort_reason;          // set when aborted
  std::string abort_message;
};

Json to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
/// UTC timestamp, ISO 8601.
std::string utc_timestamp();

void write_json(const Json& doc, const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

}  // namespace csmlab
