// Integrating-factor RK4 time stepping and run drivers that emit the
// per-record diagnostics every theorem check consumes.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csmlab/flow_models.hpp"

namespace csmlab {

/// Raised when a step produces non-finite values or the CFL bound is broken.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(std::string reason, const std::string& message)
      : std::runtime_error(message), reason_(std::move(reason)) {}
  /// "CFL" or "NaN".
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

inline constexpr double kCflSafety = 0.5;
inline constexpr double kClosureStabilityFactor = 0.25;

struct InitialCondition {
  enum class Kind { TaylorGreen, BandLimitedSeeded, FromCheckpoint };
  Kind kind = Kind::TaylorGreen;
  std::uint64_t seed = 1;
  /// Target ||v||^2_{L2} for BandLimitedSeeded; zero gives the zero field.
  double energy = 1.0;
  std::string path;
};

std::string to_string(InitialCondition::Kind kind);

struct RunConfig {
  ModelKind model = ModelKind::NSE;
  ModelParams params;
  ForcingSpec forcing;
  InitialCondition initial_condition;
  double dt = 1e-3;
  double t_end = 10.0;
  int record_every = 10;
  int n = 64;
  double length = kTwoPi;

  /// Checks every invariant; the message names the offending key.
  void validate() const;
  FlowModel flow_model() const { return FlowModel(model, params, forcing); }
};

struct DiagnosticRecord {
  double t = 0.0;
  double l2_sq = 0.0;
  double hs_sq = 0.0;
  double grad_hs_sq = 0.0;
  double forcing_hs_sq = 0.0;
  double cum_grad_hs = 0.0;
  double cum_forcing_hs = 0.0;
  double divergence_residual = 0.0;
};

struct AbortInfo {
  std::string reason;  // "CFL" or "NaN"
  std::string message;
  double t = 0.0;
  long step_index = 0;
};

struct RunResult {
  SimState final_state;
  std::vector<DiagnosticRecord> records;
  std::optional<AbortInfo> abort;

  bool completed() const { return !abort.has_value(); }
};

/// Stable time-step limits for the current state: the advective bound
/// kCflSafety * h / max|v| and the explicit-closure bound
/// kClosureStabilityFactor * h^2 / max nu_T (infinite when inactive).
struct CflLimits {
  double advective;
  double closure;
  double dt_max() const { return advective < closure ? advective : closure; }
};
CflLimits cfl_limits(const VelocityField& v, const FlowModel& model);
/// Throws NumericalAbort("CFL") when dt exceeds cfl_limits().dt_max().
void check_cfl(const VelocityField& v, const FlowModel& model, double dt);

/// One integrating-factor RK4 step: the viscous term is integrated exactly
/// with exp(-nu |k|^2 dt), the rest with classical RK4. The result is
/// re-projected. Throws NumericalAbort("NaN") on non-finite output.
SimState step(const SimState& state, const FlowModel& model, double dt);

/// Zero-mean solenoidal random field supported on 0 < |k| <= kmax, Hermitian,
/// scaled so that ||v||^2_{L2} = l2_sq. Deterministic for a given seed.
VelocityField band_limited_noise(const GridPtr& grid, std::uint64_t seed, double l2_sq, int kmax = 4);

DiagnosticRecord measure(const SimState& state, const FlowModel& model);

SimState initial_state(const RunConfig& config);

/// Runs from the configured initial condition. Records are emitted at t = 0,
/// every record_every steps, and at t_end. A numerical abort ends the run
/// early with a partial series and `abort` set.
RunResult run(const RunConfig& config);
RunResult run_from(const RunConfig& config, SimState initial);

struct PairRecord {
  double t = 0.0;
  double phi_l2_sq = 0.0;
  double phi_grad_l2_sq = 0.0;
  double cum_nu_phi_grad = 0.0;  // nu * int_0^t ||grad phi||^2_{L2}
  double cum_forcing_hs = 0.0;   // int_0^t ||f||^2_{H^s}
};

struct PairResult {
  RunResult u;
  RunResult w;
  std::vector<PairRecord> phi;
  double epsilon = 0.0;
  double nu = 0.0;
  std::optional<AbortInfo> abort;

  bool completed() const { return !abort.has_value(); }
};

/// Advances u (Navier-Stokes) and w (corrected Smagorinsky) in lockstep from
/// w(0) = u(0) + p with ||p||_{L2} = epsilon and records phi = u - w.
/// Rejects configs whose grid, dt, cadence, horizon or forcing differ.
PairResult run_pair(const RunConfig& config_u, const RunConfig& config_w, double epsilon,
                    std::uint64_t perturbation_seed);

}  // namespace csmlab
