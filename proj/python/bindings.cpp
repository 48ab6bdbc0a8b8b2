#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <variant>

#include "csmlab/experiment_io.hpp"
#include "csmlab/theorem_monitors.hpp"

namespace py = pybind11;
using namespace csmlab;

namespace {

template <typename Record>
py::array_t<double> column(const std::vector<Record>& records, double Record::*member) {
  py::array_t<double> out(static_cast<py::ssize_t>(records.size()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < records.size(); ++i) view(static_cast<py::ssize_t>(i)) = records[i].*member;
  return out;
}

py::dict series_columns(const std::vector<DiagnosticRecord>& r) {
  py::dict d;
  d["t"] = column(r, &DiagnosticRecord::t);
  d["l2_sq"] = column(r, &DiagnosticRecord::l2_sq);
  d["hs_sq"] = column(r, &DiagnosticRecord::hs_sq);
  d["grad_hs_sq"] = column(r, &DiagnosticRecord::grad_hs_sq);
  d["forcing_hs_sq"] = column(r, &DiagnosticRecord::forcing_hs_sq);
  d["cum_grad_hs"] = column(r, &DiagnosticRecord::cum_grad_hs);
  d["cum_forcing_hs"] = column(r, &DiagnosticRecord::cum_forcing_hs);
  d["divergence_residual"] = column(r, &DiagnosticRecord::divergence_residual);
  return d;
}

py::dict pair_columns(const std::vector<PairRecord>& r) {
  py::dict d;
  d["t"] = column(r, &PairRecord::t);
  d["phi_l2_sq"] = column(r, &PairRecord::phi_l2_sq);
  d["phi_grad_l2_sq"] = column(r, &PairRecord::phi_grad_l2_sq);
  d["cum_nu_phi_grad"] = column(r, &PairRecord::cum_nu_phi_grad);
  d["cum_forcing_hs"] = column(r, &PairRecord::cum_forcing_hs);
  return d;
}

py::object abort_of(const std::optional<AbortInfo>& abort) {
  if (!abort) return py::none();
  py::dict d;
  d["reason"] = abort->reason;
  d["message"] = abort->message;
  d["t"] = abort->t;
  d["step_index"] = abort->step_index;
  return d;
}

py::dict run_config(const std::string& text) {
  const RunConfig c = parse_run_config(Json::parse(text));
  std::optional<RunResult> r;
  {
    py::gil_scoped_release release;
    r = run(c);
  }
  py::dict out;
  out["series"] = series_columns(r->records);
  out["abort"] = abort_of(r->abort);
  out["config_digest"] = config_digest(to_json(c));
  return out;
}

py::dict run_pair_config(const std::string& text) {
  const PairConfig c = parse_pair_config(Json::parse(text));
  std::optional<PairResult> r;
  {
    py::gil_scoped_release release;
    r = run_pair(c.u, c.w, c.epsilon, c.perturbation_seed);
  }
  py::dict out;
  out["u"] = series_columns(r->u.records);
  out["w"] = series_columns(r->w.records);
  out["phi"] = pair_columns(r->phi);
  out["abort"] = abort_of(r->abort);
  out["config_digest"] = config_digest(to_json(c));
  return out;
}

// Returns the report as JSON text; the Python layer decodes it.
std::string verify_config(int theorem, const std::string& text) {
  const AnyConfig any = parse_config(Json::parse(text));
  const std::string digest = config_digest(to_json(any));
  TheoremReport report;
  if (theorem == 1) {
    const auto* c = std::get_if<RunConfig>(&any);
    if (!c) throw InvalidInput("theorem: the energy envelope check needs a single-model config");
    py::gil_scoped_release release;
    report = monitor_theorem1(run(*c).records, c->params.s);
  } else if (theorem == 2 || theorem == 3) {
    const auto* c = std::get_if<PairConfig>(&any);
    if (!c) throw InvalidInput("theorem: the error checks need a Pair config");
    py::gil_scoped_release release;
    const PairResult p = run_pair(c->u, c->w, c->epsilon, c->perturbation_seed);
    report = theorem == 2 ? monitor_theorem2(p.phi, c->u.params.nu)
                          : monitor_theorem3(p.phi, c->u.params.nu, c->epsilon);
  } else {
    throw InvalidInput("theorem: expected 1, 2 or 3");
  }
  report.config_digest = digest;
  return to_json(report).dump();
}

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw InvalidInput("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pseudo-spectral Navier-Stokes / corrected Smagorinsky solver";
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  m.def("run", &run_config, py::arg("config_json"));
  m.def("run_pair", &run_pair_config, py::arg("config_json"));
  m.def("verify", &verify_config, py::arg("theorem"), py::arg("config_json"));
  m.def("normalized_config", [](const std::string& text) { return to_json(parse_config(Json::parse(text))).dump(); },
        py::arg("config_json"));
  m.def("config_digest", [](const std::string& text) { return config_digest(Json::parse(text)); },
        py::arg("config_json"));
  m.def(
      "groenwall_fit",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& energy,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& g) {
        return groenwall_fit(as_vector(t), as_vector(energy), as_vector(g));
      },
      py::arg("t"), py::arg("energy"), py::arg("g"));
  m.def(
      "decay_rate_fit",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
        return decay_rate_fit(as_vector(t), as_vector(values));
      },
      py::arg("t"), py::arg("values"));
  m.attr("__version__") = kToolVersion;
}
