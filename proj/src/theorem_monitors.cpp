#include "csmlab/theorem_monitors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace csmlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogFloor = 1e-300;

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double fraction_satisfied(const std::vector<Margin>& margins) {
  if (margins.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& m : margins)
    if (m.lhs <= m.rhs * (1.0 + 1e-12) + 1e-300) ++ok;
  return static_cast<double>(ok) / static_cast<double>(margins.size());
}

bool envelope_feasible(std::span<const double> t, std::span<const double> q, double c) {
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] > c * std::exp(c * t[j])) return false;
  return true;
}

// Slope/intercept of an ordinary least-squares line.
std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

void check_pair(const std::vector<PairRecord>& pair) {
  if (pair.empty()) throw InvalidInput("pair: empty series");
}

// Minimises C1 + C2 subject to eps2 C1 + b_j C2 >= y_j, C1, C2 >= 0. The
// objective max(0, max_j (y_j - b_j c)) / eps2 + c is convex in c = C2 and
// its kinks sit at slopes of the upper hull of the points (b_j, y_j) or at
// zero crossings y_j / b_j, so evaluating those candidates is exact.
std::pair<double, double> minimal_constants(std::span<const double> b, std::span<const double> y, double eps2) {
  auto c1_for = [&](double c) {
    double worst = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) worst = std::max(worst, y[j] - b[j] * c);
    return worst / eps2;
  };

  std::vector<std::size_t> order(b.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return b[i] < b[j] || (b[i] == b[j] && y[i] < y[j]);
  });
  std::vector<std::size_t> hull;
  for (std::size_t idx : order) {
    while (hull.size() >= 2) {
      const std::size_t p = hull[hull.size() - 2], q = hull.back();
      const double cross = (b[q] - b[p]) * (y[idx] - y[p]) - (y[q] - y[p]) * (b[idx] - b[p]);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(idx);
  }

  std::vector<double> candidates{0.0};
  for (std::size_t i = 1; i < hull.size(); ++i) {
    const double db = b[hull[i]] - b[hull[i - 1]];
    if (db > 0.0) candidates.push_back((y[hull[i]] - y[hull[i - 1]]) / db);
  }
  for (std::size_t j = 0; j < b.size(); ++j)
    if (b[j] > 0.0) candidates.push_back(y[j] / b[j]);

  double best_c2 = 0.0, best_c1 = c1_for(0.0);
  for (double c : candidates) {
    if (!(c >= 0.0) || !std::isfinite(c)) continue;
    const double c1 = c1_for(c);
    if (c1 + c < best_c1 + best_c2) {
      best_c1 = c1;
      best_c2 = c;
    }
  }
  return {best_c1, best_c2};
}

}  // namespace

double Margin::ratio() const {
  if (lhs == 0.0) return rhs == 0.0 ? 1.0 : kInf;
  return rhs / lhs;
}

double groenwall_fit(std::span<const double> t, std::span<const double> energy, std::span<const double> g,
                     const MonitorSettings& settings) {
  if (energy.empty()) throw InvalidInput("groenwall_fit: empty series");
  if (t.size() != energy.size() || g.size() != energy.size())
    throw InvalidInput("groenwall_fit: t, E and g must share one time grid");
  for (double e : energy)
    if (e < 0.0) throw InvalidInput("groenwall_fit: E must be non-negative");
  double c = 0.0;
  for (std::size_t j = 0; j + 1 < energy.size(); ++j) {
    const double dt = t[j + 1] - t[j];
    if (!(dt > 0.0)) throw InvalidInput("groenwall_fit: times must increase strictly");
    if (energy[j] <= settings.energy_floor) continue;
    const double rate = (energy[j + 1] - energy[j]) / dt;
    const double slack = settings.slack_abs + settings.slack_rel * std::abs(rate);
    c = std::max(c, (rate - g[j] - slack) / energy[j]);
  }
  return c;
}

double decay_rate_fit(std::span<const double> t, std::span<const double> values) {
  if (values.size() < 4) throw InvalidInput("decay_rate_fit: at least 4 samples are required");
  if (t.size() != values.size()) throw InvalidInput("decay_rate_fit: t and values differ in length");
  const std::size_t start = values.size() / 2;
  std::vector<double> x(t.begin() + static_cast<std::ptrdiff_t>(start), t.end());
  std::vector<double> y;
  y.reserve(x.size());
  for (std::size_t j = start; j < values.size(); ++j) y.push_back(-std::log(std::max(values[j], kLogFloor)));
  return least_squares(x, y).first;
}

TheoremReport monitor_theorem1(const std::vector<DiagnosticRecord>& records, double s,
                               const MonitorSettings& settings) {
  TheoremReport report;
  report.theorem_id = "T1";
  report.diagnostics["s"] = s;
  if (records.empty()) {
    report.reason = "empty series";
    return report;
  }
  std::vector<double> t, q, hs, forcing;
  for (const auto& r : records) {
    t.push_back(r.t);
    q.push_back(r.hs_sq + r.cum_grad_hs);
    hs.push_back(r.hs_sq);
    forcing.push_back(r.forcing_hs_sq);
  }
  if (!all_finite(q) || !all_finite(t)) {
    report.reason = "non-finite Q(t)";
    return report;
  }

  double lo = settings.c_floor, hi = settings.c_cap;
  if (envelope_feasible(t, q, lo)) {
    hi = lo;
  } else if (!envelope_feasible(t, q, hi)) {
    report.reason = "no feasible C <= C_cap";
    report.constants["C"] = kInf;
    return report;
  } else {
    while (hi - lo > settings.bisection_tol) {
      const double mid = 0.5 * (lo + hi);
      (envelope_feasible(t, q, mid) ? hi : lo) = mid;
    }
  }
  const double c = hi;
  report.constants["C"] = c;
  for (std::size_t j = 0; j < q.size(); ++j) report.margins.push_back({t[j], q[j], c * std::exp(c * t[j])});
  report.satisfaction_fraction = fraction_satisfied(report.margins);
  report.pass = report.satisfaction_fraction == 1.0;
  report.reason = report.pass ? "bound holds at every record" : "bound violated";

  // Two-parameter envelope A exp(r t), lifted until it covers every record.
  std::vector<double> tp, logq;
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] > 0.0) {
      tp.push_back(t[j]);
      logq.push_back(std::log(q[j]));
    }
  if (tp.size() >= 2) {
    auto [r, log_a] = least_squares(tp, logq);
    double lift = 0.0;
    for (std::size_t j = 0; j < tp.size(); ++j) lift = std::max(lift, logq[j] - (log_a + r * tp[j]));
    report.diagnostics["envelope_A"] = std::exp(log_a + lift);
    report.diagnostics["envelope_r"] = r;
  }
  if (records.size() >= 2) report.diagnostics["groenwall_C"] = groenwall_fit(t, hs, forcing, settings);
  report.diagnostics["Q0"] = q.front();
  return report;
}

TheoremReport monitor_theorem2(const std::vector<PairRecord>& pair, double nu, const MonitorSettings& settings) {
  check_pair(pair);
  TheoremReport report;
  report.theorem_id = "T2";
  report.diagnostics["nu"] = nu;
  const double phi0 = pair.front().phi_l2_sq;
  double c = 0.0;
  bool vacuous = false;
  double max_lhs = 0.0;
  for (const auto& r : pair) {
    const double lhs = r.phi_l2_sq + r.cum_nu_phi_grad;
    const double base = phi0 + r.cum_forcing_hs;
    if (!std::isfinite(lhs) || !std::isfinite(base)) {
      report.reason = "non-finite series";
      return report;
    }
    max_lhs = std::max(max_lhs, lhs);
    if (base > 0.0) c = std::max(c, lhs / base);
    else if (lhs > 0.0) vacuous = true;
  }
  report.diagnostics["max_lhs"] = max_lhs;
  if (vacuous) {
    report.constants["C"] = kInf;
    report.reason = "bound vacuously violated: right-hand side is zero while the error is not";
    for (const auto& r : pair) report.margins.push_back({r.t, r.phi_l2_sq + r.cum_nu_phi_grad, 0.0});
    report.satisfaction_fraction = fraction_satisfied(report.margins);
    return report;
  }
  report.constants["C"] = c;
  for (const auto& r : pair)
    report.margins.push_back({r.t, r.phi_l2_sq + r.cum_nu_phi_grad, c * (phi0 + r.cum_forcing_hs)});
  report.satisfaction_fraction = fraction_satisfied(report.margins);
  report.pass = c <= settings.c_cap && report.satisfaction_fraction == 1.0;
  report.reason = report.pass ? "bound holds at every record" : "C exceeds C_cap";
  return report;
}

TheoremReport monitor_theorem3(const std::vector<PairRecord>& pair, double nu, double epsilon,
                               const MonitorSettings& settings) {
  check_pair(pair);
  if (!(nu > 0.0)) throw InvalidInput("nu: must be > 0");
  TheoremReport report;
  report.theorem_id = "T3";
  report.diagnostics["nu"] = nu;
  report.diagnostics["epsilon"] = epsilon;

  std::vector<double> t, phi, forcing;
  double max_phi = 0.0;
  bool forced = false;
  for (const auto& r : pair) {
    t.push_back(r.t);
    phi.push_back(r.phi_l2_sq);
    forcing.push_back(r.cum_forcing_hs / nu);
    max_phi = std::max(max_phi, r.phi_l2_sq);
    forced = forced || r.cum_forcing_hs != 0.0;
  }
  if (!all_finite(phi) || !all_finite(forcing)) {
    report.reason = "non-finite series";
    return report;
  }
  report.diagnostics["max_phi_l2"] = std::sqrt(max_phi);
  const double eps2 = epsilon * epsilon;

  if (!forced) {
    report.constants["C2"] = 0.0;
    if (eps2 == 0.0) {
      if (max_phi == 0.0) {
        report.constants["C1"] = 0.0;
        report.pass = true;
        report.satisfaction_fraction = 1.0;
        report.reason = "trivial: phi vanishes identically";
        for (std::size_t j = 0; j < t.size(); ++j) report.margins.push_back({t[j], 0.0, 0.0});
      } else {
        report.constants["C1"] = kInf;
        report.reason = "degenerate: phi bounded by closure drift only";
        for (std::size_t j = 0; j < t.size(); ++j) report.margins.push_back({t[j], phi[j], 0.0});
        report.satisfaction_fraction = fraction_satisfied(report.margins);
      }
      return report;
    }
    const double c1 = max_phi / eps2;
    report.constants["C1"] = c1;
    for (std::size_t j = 0; j < t.size(); ++j) report.margins.push_back({t[j], phi[j], c1 * eps2});
    report.satisfaction_fraction = fraction_satisfied(report.margins);
    const double lambda = decay_rate_fit(t, phi);
    const double ratio = max_phi > 0.0 ? std::sqrt(phi.back() / max_phi) : 0.0;
    report.decay_rate = lambda;
    report.diagnostics["decay_ratio"] = ratio;
    report.pass = c1 <= settings.c_cap && lambda > 0.0 && ratio <= settings.decay_threshold;
    if (report.pass) report.reason = "bound holds and phi decays";
    else if (c1 > settings.c_cap) report.reason = "C1 exceeds C_cap";
    else report.reason = "phi does not decay below the threshold";
    return report;
  }

  double c1 = 0.0, c2 = 0.0;
  if (eps2 == 0.0) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (forcing[j] > 0.0) c2 = std::max(c2, phi[j] / forcing[j]);
      else if (phi[j] > 0.0) c2 = kInf;
    }
  } else {
    std::tie(c1, c2) = minimal_constants(forcing, phi, eps2);
  }
  report.constants["C1"] = c1;
  report.constants["C2"] = c2;
  report.diagnostics["C2_times_nu"] = c2 * nu;
  for (std::size_t j = 0; j < t.size(); ++j) report.margins.push_back({t[j], phi[j], c1 * eps2 + c2 * forcing[j]});
  report.satisfaction_fraction = fraction_satisfied(report.margins);
  report.pass = c1 <= settings.c_cap && c2 <= settings.c_cap && report.satisfaction_fraction == 1.0;
  report.reason = report.pass ? "bound holds at every record" : "no feasible constants <= C_cap";
  return report;
}

Json to_json(const TheoremReport& report) {
  auto number = [](double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); };
  Json constants = Json::object();
  for (const auto& [k, v] : report.constants) constants[k] = number(v);
  Json diagnostics = Json::object();
  for (const auto& [k, v] : report.diagnostics) diagnostics[k] = number(v);
  Json margins = Json::array();
  for (const auto& m : report.margins) margins.push_back({{"t", m.t}, {"lhs", m.lhs}, {"rhs", number(m.rhs)},
                                                          {"ratio", number(m.ratio())}});
  return {{"theorem_id", report.theorem_id},
          {"constants", constants},
          {"satisfaction_fraction", report.satisfaction_fraction},
          {"margins", margins},
          {"decay_rate", report.decay_rate ? number(*report.decay_rate) : Json("not applicable")},
          {"pass", report.pass},
          {"reason", report.reason},
          {"config_digest", report.config_digest},
          {"tool_version", kToolVersion},
          {"diagnostics", diagnostics}};
}

void write_report(const TheoremReport& report, const std::filesystem::path& path) {
  write_json(to_json(report), path);
}

void write_margins(const TheoremReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "t,lhs,rhs,ratio\n";
  for (const auto& m : report.margins)
    out << format_double(m.t) << ',' << format_double(m.lhs) << ',' << format_double(m.rhs) << ','
        << format_double(m.ratio()) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace csmlab
