#include "csmlab/flow_models.hpp"

#include <cmath>

namespace csmlab {
namespace {

// Physical-space velocity and its four first derivatives.
struct PhysicalGradients {
  std::vector<double> u, v;
  std::vector<double> ux, uy, vx, vy;
};

PhysicalGradients physical_gradients(const VelocityField& vel) {
  const Gradient gu = gradient(vel.x);
  const Gradient gv = gradient(vel.y);
  return {inverse_transform(vel.x), inverse_transform(vel.y), inverse_transform(gu.dx),
          inverse_transform(gu.dy), inverse_transform(gv.dx), inverse_transform(gv.dy)};
}

VelocityField advection_from(const GridPtr& grid, const PhysicalGradients& p) {
  const std::size_t size = grid->size();
  std::vector<double> nx(size), ny(size);
  for (std::size_t j = 0; j < size; ++j) {
    nx[j] = p.u[j] * p.ux[j] + p.v[j] * p.uy[j];
    ny[j] = p.u[j] * p.vx[j] + p.v[j] * p.vy[j];
  }
  return dealias(forward_transform(grid, nx, ny));
}

std::vector<double> eddy_viscosity_from(const PhysicalGradients& p, const ModelParams& params) {
  const double coeff = params.cs * params.cs * params.delta * params.delta;
  std::vector<double> nu_t(p.ux.size());
  for (std::size_t j = 0; j < nu_t.size(); ++j) {
    double magnitude;
    if (params.eddy_variant == EddyVariant::GradientMagnitude) {
      magnitude = std::sqrt(p.ux[j] * p.ux[j] + p.uy[j] * p.uy[j] + p.vx[j] * p.vx[j] + p.vy[j] * p.vy[j]);
    } else {
      const double s12 = 0.5 * (p.uy[j] + p.vx[j]);
      magnitude = std::sqrt(2.0 * (p.ux[j] * p.ux[j] + p.vy[j] * p.vy[j] + 2.0 * s12 * s12));
    }
    nu_t[j] = coeff * magnitude;
  }
  return nu_t;
}

VelocityField closure_from(const GridPtr& grid, const PhysicalGradients& p, const ModelParams& params) {
  if (params.cs == 0.0) return VelocityField(grid);
  const auto nu_t = eddy_viscosity_from(p, params);
  const std::size_t size = grid->size();
  std::vector<double> fxx(size), fxy(size), fyx(size), fyy(size);
  for (std::size_t j = 0; j < size; ++j) {
    fxx[j] = nu_t[j] * p.ux[j];
    fxy[j] = nu_t[j] * p.uy[j];
    fyx[j] = nu_t[j] * p.vx[j];
    fyy[j] = nu_t[j] * p.vy[j];
  }
  VelocityField flux_x = dealias(forward_transform(grid, fxx, fxy));
  VelocityField flux_y = dealias(forward_transform(grid, fyx, fyy));
  VelocityField out(divergence(flux_x), divergence(flux_y));
  if (params.closure_sign == ClosureSign::Literal) out *= -1.0;
  return out;
}

}  // namespace

// Enum names ------------------------------------------------------------------

std::string to_string(EddyVariant v) {
  return v == EddyVariant::GradientMagnitude ? "GradientMagnitude" : "StrainRateMagnitude";
}

std::string to_string(ClosureSign s) { return s == ClosureSign::Dissipative ? "dissipative" : "literal"; }

std::string to_string(ModelKind m) { return m == ModelKind::NSE ? "NSE" : "CSM"; }

std::string to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::Zero: return "Zero";
    case ForcingKind::SteadyBandLimited: return "SteadyBandLimited";
    case ForcingKind::ExponentiallyDecaying: return "ExponentiallyDecaying";
  }
  return "Zero";
}

EddyVariant eddy_variant_from_string(const std::string& name) {
  if (name == "GradientMagnitude") return EddyVariant::GradientMagnitude;
  if (name == "StrainRateMagnitude") return EddyVariant::StrainRateMagnitude;
  throw InvalidInput("params.eddy_variant: unknown variant '" + name + "'");
}

ClosureSign closure_sign_from_string(const std::string& name) {
  if (name == "dissipative") return ClosureSign::Dissipative;
  if (name == "literal") return ClosureSign::Literal;
  throw InvalidInput("params.closure_sign: unknown sign convention '" + name + "'");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "NSE") return ModelKind::NSE;
  if (name == "CSM") return ModelKind::CSM;
  throw InvalidInput("model: unknown model '" + name + "'");
}

ForcingKind forcing_kind_from_string(const std::string& name) {
  if (name == "Zero") return ForcingKind::Zero;
  if (name == "SteadyBandLimited") return ForcingKind::SteadyBandLimited;
  if (name == "ExponentiallyDecaying") return ForcingKind::ExponentiallyDecaying;
  throw InvalidInput("forcing.kind: unknown forcing kind '" + name + "'");
}

// Parameters ------------------------------------------------------------------

void ModelParams::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidInput("params.nu: viscosity must be > 0");
  if (!(cs >= 0.0) || !std::isfinite(cs)) throw InvalidInput("params.cs: Smagorinsky constant must be >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidInput("params.delta: filter width must be > 0");
  if (!(s > 1.0) || !std::isfinite(s)) throw InvalidInput("params.s: Sobolev order must exceed d/2 = 1");
}

void ForcingSpec::validate(const WavenumberGrid& grid) const {
  if (!std::isfinite(amplitude)) throw InvalidInput("forcing.amplitude: must be finite");
  if (!(decay_rate >= 0.0) || !std::isfinite(decay_rate))
    throw InvalidInput("forcing.decay_rate: must be finite and >= 0");
  if (kind == ForcingKind::Zero) return;
  if (active_modes.empty()) throw InvalidInput("forcing.active_modes: at least one mode is required");
  for (const auto& [kx, ky] : active_modes) {
    const int k_sq = kx * kx + ky * ky;
    if (k_sq == 0 || k_sq > 4)
      throw InvalidInput("forcing.active_modes: mode (" + std::to_string(kx) + "," + std::to_string(ky) +
                         ") must satisfy 0 < |k| <= 2");
    if (!grid.dealias_mask()[grid.mode_index(kx, ky)])
      throw InvalidInput("forcing.active_modes: mode is removed by the dealias mask");
  }
}

double ForcingSpec::time_factor(double t) const {
  switch (kind) {
    case ForcingKind::Zero: return 0.0;
    case ForcingKind::SteadyBandLimited: return 1.0;
    case ForcingKind::ExponentiallyDecaying: return std::exp(-decay_rate * t);
  }
  return 0.0;
}

VelocityField ForcingSpec::evaluate(const GridPtr& grid, double t) const {
  VelocityField f(grid);
  const double factor = amplitude * time_factor(t);
  if (factor == 0.0) return f;
  for (const auto& [kx, ky] : active_modes) {
    const double norm = std::sqrt(static_cast<double>(kx * kx + ky * ky));
    // cos(k.x) has coefficient 1/2 at +k and at -k.
    const double half = 0.5 * factor / norm;
    f.x.coeff(kx, ky) += -ky * half;
    f.x.coeff(-kx, -ky) += -ky * half;
    f.y.coeff(kx, ky) += kx * half;
    f.y.coeff(-kx, -ky) += kx * half;
  }
  return f;
}

// Terms -----------------------------------------------------------------------

VelocityField nonlinear_term(const VelocityField& v) {
  return advection_from(v.grid_ptr(), physical_gradients(v));
}

std::vector<double> eddy_viscosity(const VelocityField& v, const ModelParams& params) {
  return eddy_viscosity_from(physical_gradients(v), params);
}

VelocityField csm_diffusion_term(const VelocityField& v, const ModelParams& params) {
  return closure_from(v.grid_ptr(), physical_gradients(v), params);
}

VelocityField viscous_term(const VelocityField& v, double nu) {
  VelocityField out = laplacian(v);
  out *= nu;
  return out;
}

VelocityField nse_rhs(const SimState& state, const ModelParams& params, const ForcingSpec& forcing) {
  return FlowModel(ModelKind::NSE, params, forcing).rhs(state.t, state.velocity);
}

VelocityField csm_rhs(const SimState& state, const ModelParams& params, const ForcingSpec& forcing) {
  return FlowModel(ModelKind::CSM, params, forcing).rhs(state.t, state.velocity);
}

VelocityField taylor_green(const GridPtr& grid, double t, double nu) {
  if (!(t >= 0.0)) throw InvalidInput("t: time must be >= 0");
  if (grid->length() != kTwoPi) throw InvalidInput("taylor_green: requires the default 2*pi domain");
  VelocityField v(grid);
  const double a = std::exp(-2.0 * nu * t);
  // cos x sin y = (1/4i)[e^{i(x+y)} - e^{i(x-y)} + e^{i(-x+y)} - e^{-i(x+y)}]
  const Complex q(0.0, -0.25 * a);
  v.x.coeff(1, 1) = q;
  v.x.coeff(-1, 1) = q;
  v.x.coeff(1, -1) = -q;
  v.x.coeff(-1, -1) = -q;
  // -sin x cos y = -(1/4i)[e^{i(x+y)} + e^{i(x-y)} - e^{i(-x+y)} - e^{-i(x+y)}]
  v.y.coeff(1, 1) = -q;
  v.y.coeff(1, -1) = -q;
  v.y.coeff(-1, 1) = q;
  v.y.coeff(-1, -1) = q;
  return v;
}

// FlowModel -------------------------------------------------------------------

FlowModel::FlowModel(ModelKind kind, ModelParams params, ForcingSpec forcing)
    : kind_(kind), params_(params), forcing_(std::move(forcing)) {
  params_.validate();
}

VelocityField FlowModel::explicit_tendency(double t, const VelocityField& v) const {
  const GridPtr& grid = v.grid_ptr();
  const PhysicalGradients p = physical_gradients(v);
  VelocityField tendency = advection_from(grid, p);
  tendency *= -1.0;
  if (!forcing_.is_zero()) tendency += forcing_.evaluate(grid, t);
  if (closure_active()) tendency += closure_from(grid, p, params_);
  return leray_project(std::move(tendency));
}

VelocityField FlowModel::rhs(double t, const VelocityField& v) const {
  VelocityField out = explicit_tendency(t, v);
  out += viscous_term(v, params_.nu);
  return out;
}

}  // namespace csmlab
