#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lpstable/cf_oracle.hpp"
#include "lpstable/errors.hpp"
#include "lpstable/innovations.hpp"
#include "lpstable/linear_process.hpp"
#include "lpstable/slowly_varying.hpp"
#include "lpstable/stable_law.hpp"
#include "lpstable/verification.hpp"

namespace py = pybind11;
using namespace lpstable;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(std::vector<double>&& v) {
  auto* heap = new std::vector<double>(std::move(v));
  py::capsule owner(heap, [](void* p) { delete static_cast<std::vector<double>*>(p); });
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(heap->size())};
  const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(double))};
  return Array(shape, strides, heap->data(), owner);
}

std::vector<double> from_numpy(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

py::dict log_cf_dict(const FddLogCf& r) {
  py::dict d;
  d["total"] = r.total;
  d["past"] = r.past;
  d["window"] = r.window;
  d["tail_error"] = r.tail_error;
  d["direct_depth"] = r.direct_depth;
  d["max_coefficient"] = r.max_coefficient;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear processes with stable-domain innovations: simulation, exact CF oracle, verification.";

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<ToleranceError>(m, "ToleranceError", PyExc_RuntimeError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_MemoryError);

  py::class_<SlowlyVaryingSpec>(m, "SlowlyVarying")
      .def_static("constant", &SlowlyVaryingSpec::constant, py::arg("c") = 1.0)
      .def_static("log_power", &SlowlyVaryingSpec::log_power, py::arg("c"), py::arg("p"))
      .def_static("bare_log_power", &SlowlyVaryingSpec::bare_log_power, py::arg("c"), py::arg("p"))
      .def_readonly("c", &SlowlyVaryingSpec::c)
      .def_readonly("p", &SlowlyVaryingSpec::p)
      .def_readonly("shift", &SlowlyVaryingSpec::shift)
      .def("__call__", [](const SlowlyVaryingSpec& s, double x) { return eval_sv(s, x); })
      .def("__repr__", [](const SlowlyVaryingSpec& s) {
        return s.kind == SlowlyVaryingSpec::Kind::Constant
                   ? "SlowlyVarying.constant(" + format_double(s.c) + ")"
                   : "SlowlyVarying(c=" + format_double(s.c) + ", p=" + format_double(s.p) +
                         ", shift=" + format_double(s.shift) + ")";
      });

  py::class_<SkewedStableParams>(m, "SkewedStableParams")
      .def(py::init<double, double, double>(), py::arg("alpha"), py::arg("sigma"), py::arg("D") = 0.0)
      .def_readwrite("alpha", &SkewedStableParams::alpha)
      .def_readwrite("sigma", &SkewedStableParams::sigma)
      .def_readwrite("D", &SkewedStableParams::D)
      .def("__repr__", [](const SkewedStableParams& p) {
        return "SkewedStableParams(alpha=" + format_double(p.alpha) + ", sigma=" + format_double(p.sigma) +
               ", D=" + format_double(p.D) + ")";
      });

  py::class_<StandardStable>(m, "StandardStable")
      .def(py::init<double, double, double>(), py::arg("alpha"), py::arg("beta") = 0.0, py::arg("scale") = 1.0)
      .def_readwrite("alpha", &StandardStable::alpha)
      .def_readwrite("beta", &StandardStable::beta)
      .def_readwrite("scale", &StandardStable::scale)
      .def("__repr__", [](const StandardStable& s) {
        return "StandardStable(alpha=" + format_double(s.alpha) + ", beta=" + format_double(s.beta) +
               ", scale=" + format_double(s.scale) + ")";
      });

  py::class_<InnovationSpec>(m, "InnovationSpec")
      .def_static("exact_stable", &InnovationSpec::exact_stable, py::arg("alpha"), py::arg("beta") = 0.0,
                  py::arg("scale") = 1.0)
      .def_static("pareto_tail", &InnovationSpec::pareto_tail, py::arg("alpha"), py::arg("sigma1"), py::arg("sigma2"),
                  py::arg("h") = SlowlyVaryingSpec::constant(1.0))
      .def_property_readonly("alpha", &InnovationSpec::alpha)
      .def_property_readonly("is_exact_stable", &InnovationSpec::is_exact_stable);

  py::enum_<InnovationHook>(m, "InnovationHook")
      .value("none", InnovationHook::None)
      .value("zero", InnovationHook::Zero)
      .value("one", InnovationHook::One)
      .value("impulse", InnovationHook::Impulse);

  py::class_<ProcessSpec>(m, "ProcessSpec")
      .def(py::init([](const SlowlyVaryingSpec& ell, const InnovationSpec& innovation, std::int64_t truncation,
                       InnovationHook hook) { return ProcessSpec{ell, innovation, truncation, hook}; }),
           py::arg("ell") = SlowlyVaryingSpec::constant(1.0),
           py::arg("innovation") = InnovationSpec::exact_stable(1.5, 0.0, 1.0), py::arg("truncation") = 10000,
           py::arg("hook") = InnovationHook::None)
      .def_readwrite("ell", &ProcessSpec::ell)
      .def_readwrite("innovation", &ProcessSpec::innovation)
      .def_readwrite("truncation", &ProcessSpec::truncation)
      .def_readwrite("hook", &ProcessSpec::hook);

  py::class_<PastPolicy> policy(m, "PastPolicy");
  py::enum_<PastPolicy::Mode>(policy, "Mode")
      .value("analytic", PastPolicy::Mode::Analytic)
      .value("truncate", PastPolicy::Mode::Truncate)
      .value("capped", PastPolicy::Mode::Capped);
  policy.def_static("analytic", &PastPolicy::analytic, py::arg("ratio") = 16.0)
      .def_static("truncate", &PastPolicy::truncate, py::arg("ratio"))
      .def_static("capped", &PastPolicy::capped, py::arg("M"))
      .def_readwrite("mode", &PastPolicy::mode)
      .def_readwrite("ratio", &PastPolicy::ratio)
      .def_readwrite("min_depth", &PastPolicy::min_depth)
      .def_readwrite("cap", &PastPolicy::cap)
      .def_readwrite("tolerance", &PastPolicy::tolerance);

  // slowly varying functions and the normalizer
  m.def("eval_sv", &eval_sv, py::arg("spec"), py::arg("x"));
  m.def("coefficient", &coefficient, py::arg("ell"), py::arg("i"));
  m.def(
      "coefficient_prefix_sums",
      [](const SlowlyVaryingSpec& ell, std::int64_t K) { return to_numpy(coefficient_prefix_sums(ell, K)); },
      py::arg("ell"), py::arg("K"));
  m.def("big_h", &big_h, py::arg("h"), py::arg("alpha"), py::arg("t"));
  m.def(
      "solve_h_alpha",
      [](const SlowlyVaryingSpec& h, double alpha, double N) {
        const auto r = solve_h_alpha(h, alpha, N);
        py::dict d;
        d["value"] = r.value;
        d["residual"] = r.residual;
        d["iterations"] = r.iterations;
        d["used_bisection"] = r.used_bisection;
        return d;
      },
      py::arg("h"), py::arg("alpha"), py::arg("N"));
  m.def("h_alpha", &h_alpha, py::arg("h"), py::arg("alpha"), py::arg("N"));
  m.def(
      "normalizer",
      [](const SlowlyVaryingSpec& ell, const SlowlyVaryingSpec& h, double alpha, std::int64_t N, bool cf_level) {
        return normalizer({ell, h, alpha, N, cf_level ? HMode::CfLevel : HMode::TailFunction});
      },
      py::arg("ell"), py::arg("h"), py::arg("alpha"), py::arg("N"), py::arg("cf_level") = false);

  // stable laws
  m.def(
      "from_tail_constants",
      [](double alpha, double s1, double s2, bool as_printed) {
        return from_tail_constants(alpha, s1, s2, as_printed ? TailConvention::AsPrinted : TailConvention::Calibrated);
      },
      py::arg("alpha"), py::arg("sigma1"), py::arg("sigma2"), py::arg("as_printed") = false);
  m.def("to_standard", &to_standard, py::arg("params"));
  m.def("from_standard", &from_standard, py::arg("std_params"));
  m.def("log_cf", py::overload_cast<const SkewedStableParams&, double, double>(&log_cf), py::arg("params"),
        py::arg("u"), py::arg("t") = 1.0);
  m.def("stable_tail_constant", &stable_tail_constant, py::arg("alpha"));
  m.def(
      "sample",
      [](const StandardStable& s, std::size_t n, std::uint64_t seed) {
        std::vector<double> out;
        {
          py::gil_scoped_release release;
          out = sample(s, n, seed);
        }
        return to_numpy(std::move(out));
      },
      py::arg("std_params"), py::arg("n"), py::arg("seed"));
  m.def("cdf", [](const StandardStable& s, double x) { return cdf(s, x); }, py::arg("std_params"), py::arg("x"));
  m.def(
      "cdf",
      [](const StandardStable& s, const Array& x) {
        Array out(x.request().shape);
        const double* in = x.data();
        double* dst = out.mutable_data();
        py::gil_scoped_release release;
        for (py::ssize_t k = 0; k < x.size(); ++k) dst[k] = cdf(s, in[k]);
        return out;
      },
      py::arg("std_params"), py::arg("x"));
  m.def("cdf_gil_pelaez", &cdf_gil_pelaez, py::arg("std_params"), py::arg("x"));

  // innovations
  m.def(
      "sample_innovations",
      [](const InnovationSpec& spec, std::size_t n, std::uint64_t seed) {
        std::vector<double> out;
        {
          py::gil_scoped_release release;
          out = sample_innovations(spec, n, seed);
        }
        return to_numpy(std::move(out));
      },
      py::arg("spec"), py::arg("n"), py::arg("seed"));
  m.def(
      "tail_constants",
      [](const InnovationSpec& spec) {
        const auto t = tail_constants(spec);
        return py::make_tuple(t.alpha, t.sigma1, t.sigma2, t.h);
      },
      py::arg("spec"));
  m.def("innovation_cf_params", &innovation_cf_params, py::arg("spec"));

  // linear process
  m.def("truncation_tail", &truncation_tail, py::arg("ell"), py::arg("innovation"), py::arg("M"));
  m.def(
      "simulate_path",
      [](const ProcessSpec& p, std::int64_t N, double T, std::uint64_t seed) {
        std::vector<double> out;
        {
          py::gil_scoped_release release;
          out = simulate_path(p, N, T, seed);
        }
        return to_numpy(std::move(out));
      },
      py::arg("process"), py::arg("N"), py::arg("T"), py::arg("seed"));
  m.def(
      "partial_sums",
      [](const Array& path, std::int64_t N, const std::vector<double>& times) {
        return to_numpy(partial_sums(from_numpy(path), N, times));
      },
      py::arg("path"), py::arg("N"), py::arg("times"));
  m.def(
      "normalized_fdd_sample",
      [](const ProcessSpec& p, std::int64_t N, const std::vector<double>& times, std::size_t reps, std::uint64_t seed,
         unsigned threads) {
        SampleMatrix s;
        {
          py::gil_scoped_release release;
          s = normalized_fdd_sample(p, N, {times, std::vector<double>(times.size(), 0.0)}, reps, seed, threads);
        }
        Array out({static_cast<py::ssize_t>(s.rows), static_cast<py::ssize_t>(s.cols)});
        std::copy(s.data.begin(), s.data.end(), out.mutable_data());
        return out;
      },
      py::arg("process"), py::arg("N"), py::arg("times"), py::arg("reps"), py::arg("seed"), py::arg("threads") = 1);
  m.def("process_normalizer", &process_normalizer, py::arg("process"), py::arg("N"));

  // CF oracle
  m.def(
      "v_transform", [](const std::vector<double>& u) { return v_transform(u); }, py::arg("u"));
  m.def(
      "exact_fdd_log_cf",
      [](const SlowlyVaryingSpec& ell, const SkewedStableParams& params, std::int64_t N,
         const std::vector<double>& times, const std::vector<double>& freqs, const PastPolicy& policy) {
        FddLogCf r;
        {
          py::gil_scoped_release release;
          r = exact_fdd_log_cf(ell, params, N, {times, freqs}, policy);
        }
        return log_cf_dict(r);
      },
      py::arg("ell"), py::arg("params"), py::arg("N"), py::arg("times"), py::arg("freqs"),
      py::arg("policy") = PastPolicy::analytic());
  m.def(
      "limit_log_cf",
      [](const SkewedStableParams& params, const std::vector<double>& times, const std::vector<double>& freqs) {
        return limit_log_cf(params, {times, freqs});
      },
      py::arg("params"), py::arg("times"), py::arg("freqs"));
  m.def(
      "cf_convergence_sweep",
      [](const SlowlyVaryingSpec& ell, const SkewedStableParams& params, const std::vector<double>& times,
         const std::vector<double>& freqs, const std::vector<std::int64_t>& Ns, const PastPolicy& policy,
         bool use_grid, unsigned threads) {
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = cf_convergence_sweep(ell, params, {times, freqs}, Ns, policy, use_grid, threads);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["N"] = r.N;
          d["distance"] = r.distance;
          d["past_part"] = r.past_part;
          d["max_coefficient"] = r.max_coefficient;
          d["tail_error"] = r.tail_error;
          d["wall_ms"] = r.wall_ms;
          out.append(d);
        }
        return out;
      },
      py::arg("ell"), py::arg("params"), py::arg("times"), py::arg("freqs"), py::arg("N_list"),
      py::arg("policy") = PastPolicy::analytic(), py::arg("use_grid") = false, py::arg("threads") = 1);

  // verification
  m.def(
      "ecf",
      [](const Array& x, double u) {
        const auto e = ecf(from_numpy(x), u);
        return py::make_tuple(e.value, e.se_re, e.se_im);
      },
      py::arg("samples"), py::arg("u"));
  m.def(
      "ks_distance",
      [](const Array& x, const StandardStable& law) {
        const auto v = from_numpy(x);
        py::gil_scoped_release release;
        return ks_distance(v, [&](double t) { return cdf(law, t); });
      },
      py::arg("samples"), py::arg("law"), "KS distance between samples and a stable law's CDF.");
  m.def(
      "tail_ratio_check",
      [](const Array& x, double alpha, const SlowlyVaryingSpec& h, const std::vector<double>& levels) {
        py::list out;
        for (const auto& e : tail_ratio_check(from_numpy(x), alpha, h, levels)) {
          py::dict d;
          d["level"] = e.level;
          d["sigma2_hat"] = e.sigma2_hat;
          d["sigma1_hat"] = e.sigma1_hat;
          d["right_exceedances"] = e.right_exceedances;
          d["left_exceedances"] = e.left_exceedances;
          d["warning"] = e.warning;
          out.append(d);
        }
        return out;
      },
      py::arg("samples"), py::arg("alpha"), py::arg("h"), py::arg("levels") = std::vector<double>{0.95, 0.99, 0.999});
}
