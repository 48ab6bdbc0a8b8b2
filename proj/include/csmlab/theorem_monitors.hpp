// Fits the minimal constants of the three a-priori bounds to recorded
// diagnostics and turns them into pass/fail reports.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csmlab/experiment_io.hpp"
#include "csmlab/time_integration.hpp"

namespace csmlab {

struct MonitorSettings {
  double c_cap = 1e6;
  double c_floor = 0.0;
  double bisection_tol = 1e-6;
  double slack_abs = 1e-8;
  double slack_rel = 1e-6;
  double energy_floor = 1e-14;
  double decay_threshold = 0.2;
};

/// One sampled time of an inequality lhs(t) <= rhs(t).
struct Margin {
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// rhs / lhs; infinite when lhs is zero.
  double ratio() const;
};

struct TheoremReport {
  std::string theorem_id;  // "T1", "T2" or "T3"
  std::map<std::string, double> constants;
  double satisfaction_fraction = 0.0;
  std::vector<Margin> margins;
  std::optional<double> decay_rate;
  bool pass = false;
  std::string reason;
  std::string config_digest;
  /// Side-channel numbers that are not part of the verdict.
  std::map<std::string, double> diagnostics;
};

/// Smallest C >= 0 with (E[j+1]-E[j])/dt <= C E[j] + g[j] + slack at every
/// sample where E[j] exceeds the floor.
double groenwall_fit(std::span<const double> t, std::span<const double> energy, std::span<const double> g,
                     const MonitorSettings& settings = {});

/// Least-squares slope of -log(values) over the final half of the samples.
double decay_rate_fit(std::span<const double> t, std::span<const double> values);

/// Q(t) = ||v||^2_{H^s} + int_0^t ||grad v||^2_{H^s} <= C exp(C t).
TheoremReport monitor_theorem1(const std::vector<DiagnosticRecord>& records, double s,
                               const MonitorSettings& settings = {});

/// ||phi||^2 + nu int ||grad phi||^2 <= C (||phi(0)||^2 + int ||f||^2_{H^s}).
TheoremReport monitor_theorem2(const std::vector<PairRecord>& pair, double nu, const MonitorSettings& settings = {});

/// ||phi||^2 <= C1 eps^2 + C2 int ||f||^2_{H^s} / nu, plus decay when f = 0.
TheoremReport monitor_theorem3(const std::vector<PairRecord>& pair, double nu, double epsilon,
                               const MonitorSettings& settings = {});

Json to_json(const TheoremReport& report);
void write_report(const TheoremReport& report, const std::filesystem::path& path);
/// Columns t,lhs,rhs,ratio.
void write_margins(const TheoremReport& report, const std::filesystem::path& path);

}  // namespace csmlab
