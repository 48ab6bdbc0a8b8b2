#include "csmlab/time_integration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "csmlab/experiment_io.hpp"

namespace csmlab {
namespace {

void scale_modes(VelocityField& v, const std::vector<double>& factor) {
  auto x = v.x.coeffs();
  auto y = v.y.coeffs();
  for (std::size_t m = 0; m < factor.size(); ++m) {
    x[m] *= factor[m];
    y[m] *= factor[m];
  }
}

VelocityField scaled(VelocityField v, const std::vector<double>& factor) {
  scale_modes(v, factor);
  return v;
}

long step_count(double t_end, double dt) {
  const double ratio = t_end / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return std::max(1L, static_cast<long>(nearest));
  return static_cast<long>(std::ceil(ratio));
}

double max_abs(const std::vector<double>& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

// Trapezoid accumulation of the time integrals carried by the records.
class RecordBuilder {
 public:
  explicit RecordBuilder(const FlowModel& model) : model_(model) {}

  DiagnosticRecord next(const SimState& state) {
    DiagnosticRecord r = measure(state, model_);
    if (previous_) {
      const double dt = r.t - previous_->t;
      r.cum_grad_hs = previous_->cum_grad_hs + 0.5 * dt * (previous_->grad_hs_sq + r.grad_hs_sq);
      r.cum_forcing_hs = previous_->cum_forcing_hs + 0.5 * dt * (previous_->forcing_hs_sq + r.forcing_hs_sq);
    }
    previous_ = r;
    return r;
  }

 private:
  const FlowModel& model_;
  std::optional<DiagnosticRecord> previous_;
};

PairRecord pair_record(const SimState& u, const SimState& w, const DiagnosticRecord& u_record, double nu,
                       const std::optional<PairRecord>& previous) {
  const VelocityField phi = u.velocity - w.velocity;
  PairRecord r;
  r.t = u.t;
  r.phi_l2_sq = l2_norm_sq(phi);
  r.phi_grad_l2_sq = grad_hs_norm_sq(phi, 0.0);
  r.cum_forcing_hs = u_record.cum_forcing_hs;
  if (previous) {
    r.cum_nu_phi_grad =
        previous->cum_nu_phi_grad + 0.5 * nu * (r.t - previous->t) * (previous->phi_grad_l2_sq + r.phi_grad_l2_sq);
  }
  return r;
}

AbortInfo abort_info(const NumericalAbort& e, const SimState& state) {
  return {e.reason(), e.what(), state.t, state.step_index};
}

}  // namespace

std::string to_string(InitialCondition::Kind kind) {
  switch (kind) {
    case InitialCondition::Kind::TaylorGreen: return "TaylorGreen";
    case InitialCondition::Kind::BandLimitedSeeded: return "BandLimitedSeeded";
    case InitialCondition::Kind::FromCheckpoint: return "FromCheckpoint";
  }
  return "TaylorGreen";
}

void RunConfig::validate() const {
  if (n < 8 || n % 2 != 0) throw InvalidInput("n: grid size must be even and >= 8, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidInput("length: domain length must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt: time step must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidInput("t_end: final time must be > 0");
  if (record_every < 1) throw InvalidInput("record_every: must be >= 1");
  params.validate();
  forcing.validate(*WavenumberGrid::make(n, length));
  if (initial_condition.kind == InitialCondition::Kind::TaylorGreen && length != kTwoPi)
    throw InvalidInput("initial_condition: TaylorGreen requires length = 2*pi");
  if (initial_condition.kind == InitialCondition::Kind::BandLimitedSeeded &&
      (!(initial_condition.energy >= 0.0) || !std::isfinite(initial_condition.energy)))
    throw InvalidInput("initial_condition.energy: must be finite and >= 0");
  if (initial_condition.kind == InitialCondition::Kind::FromCheckpoint && initial_condition.path.empty())
    throw InvalidInput("initial_condition.path: checkpoint path is required");
}

// Stability -------------------------------------------------------------------

CflLimits cfl_limits(const VelocityField& v, const FlowModel& model) {
  const double h = v.grid().spacing();
  const auto u = inverse_transform(v.x);
  const auto w = inverse_transform(v.y);
  double speed = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) speed = std::max(speed, u[j] * u[j] + w[j] * w[j]);
  CflLimits limits{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  if (speed > 0.0) limits.advective = kCflSafety * h / std::sqrt(speed);
  if (model.closure_active()) {
    const double nu_t = max_abs(eddy_viscosity(v, model.params()));
    if (nu_t > 0.0) limits.closure = kClosureStabilityFactor * h * h / nu_t;
  }
  return limits;
}

void check_cfl(const VelocityField& v, const FlowModel& model, double dt) {
  const CflLimits limits = cfl_limits(v, model);
  if (dt > limits.dt_max()) {
    std::ostringstream msg;
    msg << "CFL violation: dt=" << dt << " exceeds stable limit " << limits.dt_max() << " (advective "
        << limits.advective << ", closure " << limits.closure << ")";
    throw NumericalAbort("CFL", msg.str());
  }
}

// Stepping --------------------------------------------------------------------

SimState step(const SimState& state, const FlowModel& model, double dt) {
  const VelocityField& v = state.velocity;
  const auto k_sq = v.grid().k_sq();
  const double nu = model.params().nu;
  std::vector<double> full(k_sq.size()), half(k_sq.size());
  for (std::size_t m = 0; m < k_sq.size(); ++m) {
    full[m] = std::exp(-nu * k_sq[m] * dt);
    half[m] = std::exp(-0.5 * nu * k_sq[m] * dt);
  }
  const double t = state.t;
  // Overflowing stages surface as non-finite physical samples.
  auto tendency = [&](double at, const VelocityField& w) {
    try {
      return model.explicit_tendency(at, w);
    } catch (const InvalidInput& e) {
      std::ostringstream msg;
      msg << "non-finite values during step " << state.step_index + 1 << " at t=" << t << ": " << e.what();
      throw NumericalAbort("NaN", msg.str());
    }
  };

  const VelocityField a = tendency(t, v);

  VelocityField stage = v;
  stage.add_scaled(a, 0.5 * dt);
  scale_modes(stage, half);
  const VelocityField b = tendency(t + 0.5 * dt, stage);

  stage = scaled(v, half);
  stage.add_scaled(b, 0.5 * dt);
  const VelocityField c = tendency(t + 0.5 * dt, stage);

  stage = scaled(v, full);
  stage.add_scaled(scaled(c, half), dt);
  const VelocityField d = tendency(t + dt, stage);

  VelocityField increment = scaled(a, full);
  VelocityField middle = b;
  middle += c;
  increment.add_scaled(scaled(std::move(middle), half), 2.0);
  increment += d;

  VelocityField next = scaled(v, full);
  next.add_scaled(increment, dt / 6.0);
  next = leray_project(std::move(next));

  if (!next.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite velocity after step " << state.step_index + 1 << " at t=" << t + dt;
    throw NumericalAbort("NaN", msg.str());
  }
  return {t + dt, std::move(next), state.step_index + 1};
}

// Initial data ----------------------------------------------------------------

VelocityField band_limited_noise(const GridPtr& grid, std::uint64_t seed, double l2_sq, int kmax) {
  VelocityField v(grid);
  if (l2_sq == 0.0) return v;
  if (!(l2_sq > 0.0)) throw InvalidInput("band_limited_noise: target L2 norm must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = grid->n();
  const auto mask = grid->dealias_mask();
  for (int ky = 0; ky <= kmax; ++ky) {
    for (int kx = -kmax; kx <= kmax; ++kx) {
      if (ky == 0 && kx <= 0) continue;  // one representative per +/-k pair
      if (kx * kx + ky * ky > kmax * kmax) continue;
      const Complex cx(normal(rng), normal(rng));
      const Complex cy(normal(rng), normal(rng));
      if (2 * std::abs(kx) >= n || 2 * ky >= n) continue;
      const std::size_t m = grid->mode_index(kx, ky);
      if (!mask[m]) continue;
      v.x.coeffs()[m] = cx;
      v.y.coeffs()[m] = cy;
      v.x.coeffs()[grid->mirror(m)] = std::conj(cx);
      v.y.coeffs()[grid->mirror(m)] = std::conj(cy);
    }
  }
  v = leray_project(std::move(v));
  const double current = l2_norm_sq(v);
  v *= std::sqrt(l2_sq / current);
  return v;
}

SimState initial_state(const RunConfig& config) {
  const GridPtr grid = WavenumberGrid::make(config.n, config.length);
  const auto& ic = config.initial_condition;
  switch (ic.kind) {
    case InitialCondition::Kind::TaylorGreen:
      return {0.0, taylor_green(grid, 0.0, config.params.nu), 0};
    case InitialCondition::Kind::BandLimitedSeeded:
      return {0.0, band_limited_noise(grid, ic.seed, ic.energy), 0};
    case InitialCondition::Kind::FromCheckpoint: {
      Checkpoint cp = checkpoint_load(ic.path);
      if (cp.state.velocity.grid().n() != config.n)
        throw InvalidInput("initial_condition.path: checkpoint grid n=" +
                           std::to_string(cp.state.velocity.grid().n()) + " does not match n=" +
                           std::to_string(config.n));
      // Re-attach to a grid built from the config so lengths agree exactly.
      SpectralField x(grid, std::vector<Complex>(cp.state.velocity.x.coeffs().begin(),
                                                 cp.state.velocity.x.coeffs().end()));
      SpectralField y(grid, std::vector<Complex>(cp.state.velocity.y.coeffs().begin(),
                                                 cp.state.velocity.y.coeffs().end()));
      return {0.0, VelocityField(std::move(x), std::move(y)), 0};
    }
  }
  throw InvalidInput("initial_condition.kind: unsupported");
}

// Runs ------------------------------------------------------------------------

DiagnosticRecord measure(const SimState& state, const FlowModel& model) {
  const double s = model.params().s;
  DiagnosticRecord r;
  r.t = state.t;
  r.l2_sq = l2_norm_sq(state.velocity);
  r.hs_sq = hs_norm_sq_velocity(state.velocity, s);
  r.grad_hs_sq = grad_hs_norm_sq(state.velocity, s);
  if (!model.forcing().is_zero())
    r.forcing_hs_sq = hs_norm_sq_velocity(model.forcing().evaluate(state.velocity.grid_ptr(), state.t), s);
  r.divergence_residual = divergence_residual(state.velocity);
  return r;
}

RunResult run(const RunConfig& config) {
  config.validate();
  return run_from(config, initial_state(config));
}

RunResult run_from(const RunConfig& config, SimState initial) {
  config.validate();
  const FlowModel model = config.flow_model();
  RecordBuilder builder(model);
  RunResult result{std::move(initial), {}, std::nullopt};
  SimState& state = result.final_state;
  result.records.push_back(builder.next(state));

  const long steps = step_count(config.t_end, config.dt);
  try {
    check_cfl(state.velocity, model, config.dt);
    for (long i = 1; i <= steps; ++i) {
      const double dt = i == steps ? config.t_end - (steps - 1) * config.dt : config.dt;
      state = step(state, model, dt);
      state.t = i == steps ? config.t_end : i * config.dt;
      if (i % config.record_every == 0 || i == steps) {
        result.records.push_back(builder.next(state));
        if (i < steps) check_cfl(state.velocity, model, config.dt);
      }
    }
  } catch (const NumericalAbort& e) {
    result.abort = abort_info(e, state);
  }
  return result;
}

PairResult run_pair(const RunConfig& config_u, const RunConfig& config_w, double epsilon,
                    std::uint64_t perturbation_seed) {
  config_u.validate();
  config_w.validate();
  if (config_u.model != ModelKind::NSE) throw InvalidInput("model: u must run the Navier-Stokes model (NSE)");
  if (config_w.model != ModelKind::CSM) throw InvalidInput("model: w must run the corrected Smagorinsky model (CSM)");
  if (config_u.n != config_w.n || config_u.length != config_w.length)
    throw InvalidInput("n: paired runs must share the grid");
  if (config_u.dt != config_w.dt) throw InvalidInput("dt: paired runs must share the time step");
  if (config_u.record_every != config_w.record_every)
    throw InvalidInput("record_every: paired runs must share the record cadence");
  if (config_u.t_end != config_w.t_end) throw InvalidInput("t_end: paired runs must share the horizon");
  if (config_u.params.nu != config_w.params.nu) throw InvalidInput("params.nu: paired runs must share viscosity");
  const auto& fu = config_u.forcing;
  const auto& fw = config_w.forcing;
  if (fu.kind != fw.kind || fu.amplitude != fw.amplitude || fu.active_modes != fw.active_modes ||
      fu.decay_rate != fw.decay_rate)
    throw InvalidInput("forcing: paired runs must share the forcing");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon: must be finite and >= 0");

  const FlowModel model_u = config_u.flow_model();
  const FlowModel model_w = config_w.flow_model();
  const double nu = config_u.params.nu;

  SimState u = initial_state(config_u);
  SimState w = u;
  w.velocity += band_limited_noise(u.velocity.grid_ptr(), perturbation_seed, epsilon * epsilon);

  std::vector<DiagnosticRecord> records_u, records_w;
  std::vector<PairRecord> phi;
  RecordBuilder builder_u(model_u);
  RecordBuilder builder_w(model_w);
  auto emit = [&] {
    records_u.push_back(builder_u.next(u));
    records_w.push_back(builder_w.next(w));
    std::optional<PairRecord> previous;
    if (!phi.empty()) previous = phi.back();
    phi.push_back(pair_record(u, w, records_u.back(), nu, previous));
  };
  emit();

  const long steps = step_count(config_u.t_end, config_u.dt);
  std::optional<AbortInfo> abort;
  const SimState* current = &u;
  try {
    current = &u;
    check_cfl(u.velocity, model_u, config_u.dt);
    current = &w;
    check_cfl(w.velocity, model_w, config_w.dt);
    for (long i = 1; i <= steps; ++i) {
      const double dt = i == steps ? config_u.t_end - (steps - 1) * config_u.dt : config_u.dt;
      const double t = i == steps ? config_u.t_end : i * config_u.dt;
      current = &u;
      u = step(u, model_u, dt);
      u.t = t;
      current = &w;
      w = step(w, model_w, dt);
      w.t = t;
      if (i % config_u.record_every == 0 || i == steps) {
        emit();
        if (i < steps) {
          current = &u;
          check_cfl(u.velocity, model_u, config_u.dt);
          current = &w;
          check_cfl(w.velocity, model_w, config_w.dt);
        }
      }
    }
  } catch (const NumericalAbort& e) {
    abort = abort_info(e, *current);
  }
  return PairResult{RunResult{std::move(u), std::move(records_u), abort},
                    RunResult{std::move(w), std::move(records_w), abort},
                    std::move(phi),
                    epsilon,
                    nu,
                    abort};
}

}  // namespace csmlab
