// Right-hand sides of the Navier-Stokes equations and the corrected
// Smagorinsky model on the periodic torus. Pressure never appears: every
// tendency is Leray-projected, which annihilates gradient terms.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "csmlab/spectral.hpp"

namespace csmlab {

enum class EddyVariant {
  GradientMagnitude,   // nu_T = Cs^2 delta^2 |grad w|
  StrainRateMagnitude  // nu_T = Cs^2 delta^2 sqrt(2 S:S)
};

/// Sign applied to div(nu_T grad w) when it is moved to the right-hand side.
/// Dissipative adds +div(nu_T grad w), so the closure removes energy.
/// Literal keeps the minus sign exactly as the model equation is written.
enum class ClosureSign { Dissipative, Literal };

enum class ModelKind { NSE, CSM };

std::string to_string(EddyVariant v);
std::string to_string(ClosureSign s);
std::string to_string(ModelKind m);
EddyVariant eddy_variant_from_string(const std::string& name);
ClosureSign closure_sign_from_string(const std::string& name);
ModelKind model_kind_from_string(const std::string& name);

inline constexpr double kDefaultSmagorinskyConstant = 0.17;

struct ModelParams {
  double nu = 0.1;
  double cs = kDefaultSmagorinskyConstant;
  double delta = kTwoPi / 64;  // grid spacing of the default grid
  double s = 2.0;
  EddyVariant eddy_variant = EddyVariant::GradientMagnitude;
  ClosureSign closure_sign = ClosureSign::Dissipative;

  /// nu > 0, delta > 0, cs >= 0, s > 1 (s > d/2 with d = 2).
  void validate() const;
};

enum class ForcingKind { Zero, SteadyBandLimited, ExponentiallyDecaying };
std::string to_string(ForcingKind k);
ForcingKind forcing_kind_from_string(const std::string& name);

/// Band-limited solenoidal body force. Each active mode k contributes
/// amplitude * (-k_y, k_x) / |k| * cos(k . x); the time factor is 1 for the
/// steady kind and exp(-decay_rate t) for the decaying kind.
struct ForcingSpec {
  ForcingKind kind = ForcingKind::Zero;
  double amplitude = 0.0;
  std::vector<std::array<int, 2>> active_modes{{0, 1}, {1, 1}};
  double decay_rate = 0.0;

  /// Active modes must satisfy 0 < |k| <= 2 and survive the dealias mask.
  void validate(const WavenumberGrid& grid) const;
  bool is_zero() const { return kind == ForcingKind::Zero || amplitude == 0.0; }
  double time_factor(double t) const;
  VelocityField evaluate(const GridPtr& grid, double t) const;
};

struct SimState {
  double t = 0.0;
  VelocityField velocity;
  long step_index = 0;
};

/// (v . grad) v evaluated pseudo-spectrally and dealiased. Not projected.
VelocityField nonlinear_term(const VelocityField& v);

/// Pointwise eddy viscosity on the physical grid (row-major samples).
std::vector<double> eddy_viscosity(const VelocityField& v, const ModelParams& params);

/// The closure as it appears on the right-hand side, +/- div(nu_T grad v_i)
/// per component according to params.closure_sign. Dealiased, not projected.
VelocityField csm_diffusion_term(const VelocityField& v, const ModelParams& params);

/// nu * Laplacian(v).
VelocityField viscous_term(const VelocityField& v, double nu);

/// P[-(u.grad)u + f] + nu Lap u.
VelocityField nse_rhs(const SimState& state, const ModelParams& params, const ForcingSpec& forcing);
/// nse_rhs + P[closure]. Identical to nse_rhs when cs == 0.
VelocityField csm_rhs(const SimState& state, const ModelParams& params, const ForcingSpec& forcing);

/// (cos x sin y, -sin x cos y) e^{-2 nu t}. Requires the default 2*pi domain
/// so that the field is a single Fourier shell.
VelocityField taylor_green(const GridPtr& grid, double t, double nu);

/// A fully specified dynamical system: which equations, with which
/// parameters and forcing. Splits the right-hand side into the stiff linear
/// viscous part and everything else for integrating-factor schemes.
class FlowModel {
 public:
  FlowModel(ModelKind kind, ModelParams params, ForcingSpec forcing);

  ModelKind kind() const { return kind_; }
  const ModelParams& params() const { return params_; }
  const ForcingSpec& forcing() const { return forcing_; }
  bool closure_active() const { return kind_ == ModelKind::CSM && params_.cs != 0.0; }

  /// Everything but nu Lap v: P[-(v.grad)v + f(t) (+ closure)].
  VelocityField explicit_tendency(double t, const VelocityField& v) const;
  /// explicit_tendency + nu Lap v.
  VelocityField rhs(double t, const VelocityField& v) const;

 private:
  ModelKind kind_;
  ModelParams params_;
  ForcingSpec forcing_;
};

}  // namespace csmlab
