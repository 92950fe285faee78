#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qpkdv/diophantine.hpp"
#include "qpkdv/restriction_norms.hpp"

namespace py = pybind11;
using namespace qpkdv;

namespace {

using Alpha = std::shared_ptr<FrequencyVector>;

py::int_ to_py(const BigInt& x) { return py::int_(py::module_::import("builtins").attr("int")(x.str())); }

MultiIndex index(const std::vector<std::int64_t>& k) { return MultiIndex(k); }

std::vector<std::int64_t> tuple(const MultiIndex& k) {
  std::vector<std::int64_t> out(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) out[j] = k[j];
  return out;
}

/// Modes as {(k_1, ..., k_N): c}.
CoefficientField field(const Alpha& alpha, const py::dict& modes, bool real_symmetric) {
  std::vector<Mode> m;
  for (const auto& [k, c] : modes) m.push_back({index(k.cast<std::vector<std::int64_t>>()), c.cast<Complex>()});
  return CoefficientField(alpha, std::move(m), real_symmetric);
}

py::dict modes_of(const CoefficientField& f) {
  py::dict out;
  for (const auto& m : f.modes()) out[py::tuple(py::cast(tuple(m.k)))] = m.c;
  return out;
}

py::dict convergent_dict(const Convergent& c) {
  py::dict d;
  d["n"] = c.n;
  d["p"] = to_py(c.p);
  d["q"] = to_py(c.q);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quasi-periodic KdV: lattices, spectral fields, dynamics, restriction norms and Diophantine tools.";

  py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::class_<FrequencyVector, Alpha>(m, "FrequencyVector")
      .def(py::init<std::vector<std::string>>(), py::arg("decimals"))
      .def_property_readonly("dimension", &FrequencyVector::dimension)
      .def_property_readonly("decimals", &FrequencyVector::decimals)
      .def("values", [](const FrequencyVector& a) {
        std::vector<double> v;
        for (std::size_t j = 0; j < a.dimension(); ++j) v.push_back(a.component_double(j));
        return v;
      })
      .def("frequency", [](const FrequencyVector& a, const std::vector<std::int64_t>& k) {
        return to_double(generated_frequency(a, index(k)));
      });

  py::class_<WeightProfile>(m, "WeightProfile")
      .def(py::init<std::vector<double>, double>(), py::arg("sigma"), py::arg("a"))
      .def_property_readonly("sigma", &WeightProfile::sigma)
      .def_property_readonly("a", &WeightProfile::a)
      .def_property_readonly("s", &WeightProfile::s);

  m.def("weight", [](const WeightProfile& p, const FrequencyVector& a, const std::vector<std::int64_t>& k) {
    return weight(p, a, index(k));
  });
  m.def("check_assumption_A", [](const std::vector<double>& sigma) {
    const auto r = check_assumption_A(sigma);
    return py::make_tuple(r.holds, r.violated);
  });
  m.def("lambda_s_vertices", &lambda_s_vertices, py::arg("s"), py::arg("n"));
  m.def("min_frequency_gap", [](const FrequencyVector& a, int bound) {
    const auto g = min_frequency_gap(a, TruncationBox(a, bound));
    return py::make_tuple(to_double(g.gap), tuple(g.index));
  }, py::arg("alpha"), py::arg("bound"));

  py::class_<CoefficientField>(m, "CoefficientField")
      .def(py::init(&field), py::arg("alpha"), py::arg("modes"), py::arg("real_symmetric") = false)
      .def_property_readonly("alpha", [](const CoefficientField& f) { return std::const_pointer_cast<FrequencyVector>(f.alpha_ptr()); })
      .def_property_readonly("real_symmetric", &CoefficientField::real_symmetric)
      .def("modes", &modes_of)
      .def("coefficient", [](const CoefficientField& f, const std::vector<std::int64_t>& k) { return f.coefficient(index(k)); })
      .def("scaled", &CoefficientField::scaled)
      .def("__len__", &CoefficientField::size)
      .def("__add__", [](const CoefficientField& a, const CoefficientField& b) { return a + b; })
      .def("__sub__", [](const CoefficientField& a, const CoefficientField& b) { return a - b; });

  m.def("gnorm", &gnorm, py::arg("f"), py::arg("profile"));
  m.def("evaluate", [](const CoefficientField& f, const std::vector<double>& xs) { return evaluate(f, xs); });
  m.def("product", [](const CoefficientField& u, const CoefficientField& v, std::optional<int> bound) {
    if (!bound) return convolve_product(u, v);
    return convolve_product(u, v, TruncationBox(u.alpha(), *bound));
  }, py::arg("u"), py::arg("v"), py::arg("box") = py::none());
  m.def("x_derivative", &x_derivative);
  m.def("linear_propagator", &linear_propagator, py::arg("f"), py::arg("t"));
  m.def("random_field", [](const Alpha& alpha, int bound, std::uint64_t seed, double gamma, bool real) {
    return random_field(alpha, TruncationBox(*alpha, bound), seed, bracket_decay(gamma), real);
  }, py::arg("alpha"), py::arg("box"), py::arg("seed"), py::arg("gamma") = 2.0, py::arg("real_symmetric") = true);

  m.def("integrate", [](const CoefficientField& f, double T, double dt, int box, const std::string& scheme,
                        bool nonlinear, int record_every) {
    IntegratorConfig c;
    c.T = T;
    c.dt = dt;
    c.box = box;
    c.scheme = parse_scheme(scheme);
    c.nonlinear = nonlinear;
    c.record_every = record_every;
    const auto traj = integrate(f, c);
    const auto r = conservation_report(traj);
    py::dict out;
    out["times"] = traj.times();
    std::vector<double> g;
    for (const auto& d : traj.diagnostics()) g.push_back(d.g00_norm);
    out["g00_norm"] = g;
    out["final"] = traj.state(traj.size() - 1);
    out["g00_drift"] = r.g00_drift;
    out["zero_mode_mass"] = r.zero_mode_mass;
    return out;
  }, py::arg("f"), py::arg("T"), py::arg("dt"), py::arg("box"), py::arg("scheme") = "exponential-RK4",
     py::arg("nonlinear") = true, py::arg("record_every") = 1);

  m.def("picard", [](const CoefficientField& f, double T, double dt, int box, const WeightProfile& profile, int m_max,
                     double tol) {
    PicardConfig c;
    c.T = T;
    c.dt = dt;
    c.box = box;
    c.profile = profile;
    c.m_max = m_max;
    c.tol = tol;
    const auto res = picard_iterate(f, c);
    py::dict out;
    out["iterations"] = res.report.iterations;
    out["norms"] = res.report.norms;
    out["differences"] = res.report.differences;
    out["ratios"] = res.report.ratios;
    out["converged"] = res.report.converged;
    out["diverged"] = res.report.diverged;
    out["final"] = res.trajectory.state(res.trajectory.size() - 1);
    return out;
  }, py::arg("f"), py::arg("T"), py::arg("dt"), py::arg("box"), py::arg("profile"), py::arg("m_max") = 20,
     py::arg("tol") = 1e-12);
  m.def("existence_time", &existence_time, py::arg("r"), py::arg("theta"), py::arg("c") = 1.0);

  m.def("resonance", [](const FrequencyVector& a, const std::vector<std::int64_t>& k, const std::vector<std::int64_t>& kp) {
    return to_double(resonance(a, index(k), index(kp)));
  });
  m.def("omega_classify", [](const FrequencyVector& a, double tau, const std::vector<std::int64_t>& k, double taup,
                             const std::vector<std::int64_t>& kp) { return omega_classify(a, tau, index(k), taup, index(kp)); });
  m.def("bilinear_probe", [](const Alpha& alpha, const std::vector<double>& sigma, double b, const std::vector<double>& Ts,
                             const std::string& which, int size, int box, std::uint64_t seed, int threads) {
    Ensemble e;
    e.size = size;
    e.box = box;
    e.seed = seed;
    ProbeOptions opt;
    opt.threads = threads;
    return probe_summary_json(bilinear_probe(alpha, sigma, b, Ts, e, parse_inequality(which), opt));
  }, py::arg("alpha"), py::arg("sigma"), py::arg("b"), py::arg("Ts"), py::arg("inequality") = "E41",
     py::arg("size") = 100, py::arg("box") = 8, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def("continued_fraction", [](const std::string& text, int depth) {
    const auto cf = parse_continued_fraction(text, depth);
    py::dict out;
    py::list q;
    for (const auto& a : cf.quotients) q.append(to_py(a));
    out["quotients"] = q;
    py::list c;
    for (const auto& x : convergents(cf)) c.append(convergent_dict(x));
    out["convergents"] = c;
    out["rational"] = cf.rational;
    out["truncated"] = cf.truncated;
    out["mu"] = to_decimal(cf.mu, 60);
    return out;
  }, py::arg("text"), py::arg("depth") = 40);
  m.def("rho_estimate", [](const std::string& text, int depth) {
    const auto est = rho_estimate(parse_continued_fraction(text, depth));
    py::dict out;
    out["index"] = est.index;
    out["rho"] = est.rho;
    out["K"] = est.K;
    out["rho_hat"] = est.rho_hat;
    out["K_hat"] = est.K_hat;
    return out;
  }, py::arg("text"), py::arg("depth") = 40);
  m.def("inflation_threshold", &inflation_threshold, py::arg("sigma"), py::arg("rho"));
  m.def("inflation_report", [](const std::string& mu, int depth, const WeightProfile& profile, double t, int n_first,
                               int n_last, bool unit_weight) {
    const auto rep = inflation_report(inflation_setup(parse_continued_fraction(mu, depth)), profile, t, n_first, n_last,
                                      unit_weight);
    py::list rows;
    for (const auto& r : rep.rows) {
      py::dict d;
      d["n"] = r.n;
      d["p"] = to_py(r.p);
      d["q"] = to_py(r.q);
      d["delta"] = r.delta.convert_to<double>();
      d["f_norm"] = r.f_norm;
      d["I1"] = r.I1;
      d["I2"] = r.I2;
      d["I3"] = r.I3;
      d["ratio"] = r.ratio;
      d["ratio_sup"] = r.ratio_sup;
      rows.append(d);
    }
    py::dict out;
    out["rows"] = rows;
    out["rho_hat"] = rep.rho_hat;
    out["threshold"] = rep.threshold;
    out["growth"] = rep.growth;
    out["monotone_growth"] = rep.monotone_growth;
    return out;
  }, py::arg("mu") = "liouville", py::arg("depth") = 12, py::arg("profile") = WeightProfile({0.0, 0.0}, 0.0),
     py::arg("t") = 0.5, py::arg("n_first") = 0, py::arg("n_last") = 5, py::arg("unit_weight") = false);
  m.def("borderline_divergence_demo", [](const FrequencyVector& a, const WeightProfile& p, int n) {
    const auto r = borderline_divergence_demo(a, p, n);
    return py::make_tuple(r.norm, r.pairing, r.modes);
  }, py::arg("alpha"), py::arg("profile"), py::arg("n"));
}
