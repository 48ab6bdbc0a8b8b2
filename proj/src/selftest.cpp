#include "csmlab/selftest.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include <unistd.h>

#include "csmlab/experiment_io.hpp"
#include "csmlab/theorem_monitors.hpp"

namespace csmlab {
namespace {

using Check = std::function<std::string()>;  // empty string means pass

VelocityField random_solenoidal(const GridPtr& grid, std::mt19937_64& rng) {
  return band_limited_noise(grid, rng(), 1.0, grid->n() / 3);
}

std::string norm_oracle() {
  // Direct DFT of random samples against the spectral norms.
  const int n = 8;
  const GridPtr grid = WavenumberGrid::make(n);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> f(grid->size());
    for (auto& v : f) v = normal(rng);
    const SpectralField field = forward_transform(grid, f);
    for (double s : {0.0, 1.0, 2.0}) {
      double direct = 0.0;
      for (int ky = -n / 2; ky < n / 2; ++ky)
        for (int kx = -n / 2; kx < n / 2; ++kx) {
          Complex c = 0.0;
          for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
              c += f[iy * n + ix] * std::polar(1.0, -kTwoPi * (kx * ix + ky * iy) / n);
          c /= double(n * n);
          direct += std::pow(1.0 + kx * kx + ky * ky, s) * std::norm(c);
        }
      direct *= kTwoPi * kTwoPi;
      const double got = hs_norm_sq(field, s);
      if (std::abs(got - direct) > 1e-12 * std::max(1.0, direct)) return "H^s norm mismatch";
    }
  }
  return {};
}

std::string taylor_green_exactness() {
  RunConfig c;
  c.n = 32;
  c.t_end = 1.0;
  c.record_every = 100;
  const RunResult r = run(c);
  if (!r.completed()) return "run aborted";
  for (const auto& rec : r.records) {
    const double exact = 2.0 * std::numbers::pi * std::numbers::pi * std::exp(-4.0 * c.params.nu * rec.t);
    if (std::abs(rec.l2_sq / exact - 1.0) > 1e-6) return "energy deviates from closed form at t=" + format_double(rec.t);
  }
  return {};
}

std::string closure_dissipative() {
  const GridPtr grid = WavenumberGrid::make(32);
  std::mt19937_64 rng(5);
  ModelParams p;
  p.delta = grid->spacing();
  for (int trial = 0; trial < 10; ++trial) {
    const VelocityField v = random_solenoidal(grid, rng);
    if (inner_product(csm_diffusion_term(v, p), v) > 1e-10) return "closure injects energy";
  }
  p.cs = 0.0;
  const VelocityField v = random_solenoidal(grid, rng);
  const SimState st{0.0, v, 0};
  const VelocityField diff = nse_rhs(st, p, {}) - csm_rhs(st, p, {});
  if (diff.max_amplitude() > 1e-14) return "cs=0 CSM differs from NSE";
  return {};
}

std::string groenwall_oracle() {
  for (double a : {0.0, 0.5, 2.0}) {
    const double dt = 1e-3;
    std::vector<double> t, e, g;
    double y = 1.0;
    for (int j = 0; j <= 1000; ++j) {
      t.push_back(j * dt);
      e.push_back(y);
      g.push_back(1.0);
      const double h = dt / 10;
      for (int k = 0; k < 10; ++k) {
        auto f = [a](double v) { return a * v + 1.0; };
        const double k1 = f(y), k2 = f(y + h / 2 * k1), k3 = f(y + h / 2 * k2), k4 = f(y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      }
    }
    if (std::abs(groenwall_fit(t, e, g) - a) > 5e-3) return "fit misses a=" + format_double(a);
  }
  return {};
}

std::string decay_fit() {
  std::vector<double> t, v;
  for (int j = 0; j < 50; ++j) {
    t.push_back(0.1 * j);
    v.push_back(std::exp(-3.0 * t.back()));
  }
  if (std::abs(decay_rate_fit(t, v) - 3.0) > 1e-9) return "exponential rate not recovered";
  return {};
}

std::string theorem1_decaying() {
  RunConfig c;
  c.model = ModelKind::CSM;
  c.n = 32;
  c.t_end = 1.0;
  c.params.delta = kTwoPi / c.n;
  const RunResult r = run(c);
  const TheoremReport rep = monitor_theorem1(r.records, c.params.s);
  const double q0 = r.records.front().hs_sq + r.records.front().cum_grad_hs;
  if (!rep.pass) return rep.reason;
  if (std::abs(rep.constants.at("C") - q0) > 1e-6) return "C differs from Q(0)";
  return {};
}

std::string pair_contraction() {
  RunConfig c;
  c.n = 32;
  c.t_end = 2.0;
  c.params.cs = 0.0;
  c.params.delta = kTwoPi / c.n;
  RunConfig w = c;
  w.model = ModelKind::CSM;
  const PairResult p = run_pair(c, w, 1e-3, 3);
  const TheoremReport rep = monitor_theorem2(p.phi, c.params.nu);
  if (!rep.pass || rep.constants.at("C") > 1.0) return "C=" + format_double(rep.constants.at("C"));
  return {};
}

std::string trivial_pair() {
  RunConfig c;
  c.n = 16;
  c.t_end = 0.5;
  c.initial_condition.kind = InitialCondition::Kind::BandLimitedSeeded;
  c.initial_condition.energy = 0.0;
  c.params.delta = kTwoPi / c.n;
  RunConfig w = c;
  w.model = ModelKind::CSM;
  const PairResult p = run_pair(c, w, 0.0, 3);
  const TheoremReport rep = monitor_theorem3(p.phi, c.params.nu, 0.0);
  return rep.pass ? std::string() : rep.reason;
}

std::string round_trips() {
  const auto dir = std::filesystem::temp_directory_path() / ("csmlab-selftest-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() { std::error_code ec; std::filesystem::remove_all(p, ec); }
  } cleanup{dir};

  const Json doc = Json::parse(R"({"model":"NSE","initial_condition":"TaylorGreen"})");
  const Json echo = to_json(parse_config(doc));
  if (config_digest(to_json(parse_config(echo))) != config_digest(echo)) return "config digest changed";

  RunConfig c;
  c.n = 16;
  c.t_end = 0.1;
  c.record_every = 5;
  const RunResult r = run(c);
  write_series(r.records, dir / "s.csv");
  const auto back = read_series(dir / "s.csv");
  if (back.size() != r.records.size()) return "series length changed";
  for (std::size_t i = 0; i < back.size(); ++i)
    if (back[i].l2_sq != r.records[i].l2_sq || back[i].cum_grad_hs != r.records[i].cum_grad_hs)
      return "series values changed";

  checkpoint_save(dir / "c.bin", r.final_state, "x");
  const Checkpoint cp = checkpoint_load(dir / "c.bin");
  const auto a = r.final_state.velocity.x.coeffs(), b = cp.state.velocity.x.coeffs();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return "checkpoint coefficients changed";
  const RunResult again = run(c);
  if (again.records.back().l2_sq != r.records.back().l2_sq) return "repeat run not bit-identical";
  return {};
}

}  // namespace

std::vector<SelftestCase> run_selftest(std::ostream& log) {
  const std::vector<std::pair<std::string, Check>> checks{
      {"norms match direct DFT", norm_oracle},
      {"Taylor-Green energy decay", taylor_green_exactness},
      {"closure is dissipative", closure_dissipative},
      {"Groenwall fit recovers rate", groenwall_oracle},
      {"decay rate fit", decay_fit},
      {"energy envelope constant", theorem1_decaying},
      {"identical-model pair contracts", pair_contraction},
      {"zero pair passes trivially", trivial_pair},
      {"config, series and checkpoint round trips", round_trips},
  };
  std::vector<SelftestCase> results;
  for (const auto& [name, check] : checks) {
    const auto start = std::chrono::steady_clock::now();
    SelftestCase result{name, false, {}};
    try {
      result.detail = check();
      result.pass = result.detail.empty();
    } catch (const std::exception& e) {
      result.detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (result.pass ? "PASS " : "FAIL ") << name << " (" << std::fixed << std::setprecision(2) << secs << " s)";
    if (!result.pass) line << ": " << result.detail;
    log << line.str() << '\n';
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace csmlab
