#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "couplab/bounds.hpp"
#include "couplab/config.hpp"
#include "couplab/convex_prob.hpp"
#include "couplab/coupling_lab.hpp"
#include "couplab/gaussian_kernel.hpp"
#include "couplab/smooth_approx.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

couplab::Vec to_vec(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
    return couplab::Vec(a.data(), a.data() + a.size());
}

couplab::Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
    couplab::Matrix m(a.shape(0), a.shape(1));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

py::array_t<double> from_vec(const couplab::Vec& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

couplab::CovarianceModel model_from(const py::array_t<double>& cov, const py::array_t<double>& mean) {
    couplab::CovarianceModel model;
    model.cov = to_matrix(cov);
    model.mean = to_vec(mean);
    if (model.mean.size() != model.cov.rows())
        throw std::invalid_argument("mean length must match covariance dimension");
    auto chol = couplab::psd_repair(model.cov);
    model.factor = std::move(chol.factor);
    model.jitter = chol.jitter;
    return model;
}

}  // namespace

PYBIND11_MODULE(_couplab, m) {
    m.doc() = "Coupling experiments for suprema of empirical, bootstrap and Gaussian processes";
    m.attr("__version__") = couplab::kVersion;

    // smooth approximation tools
    m.def(
        "softmax",
        [](py::array_t<double> x, double beta, std::optional<py::array_t<double>> mu_bar) {
            const auto xv = to_vec(x);
            if (mu_bar) {
                const auto mv = to_vec(*mu_bar);
                return couplab::softmax(xv, beta, mv);
            }
            return couplab::softmax(xv, beta);
        },
        "x"_a, "beta"_a, "mu_bar"_a = py::none(),
        "Numerically stable smooth maximum beta^-1 log sum exp(beta (x_j + mu_bar_j)).");

    py::class_<couplab::MollifiedIndicator>(m, "MollifiedIndicator")
        .def(py::init([](const std::vector<std::pair<double, double>>& intervals, double delta,
                         int nodes) {
                 return couplab::MollifiedIndicator(intervals, delta, nodes);
             }),
             "intervals"_a, "delta"_a, "quadrature_nodes"_a = 201)
        .def("__call__", [](const couplab::MollifiedIndicator& g, double t) { return g(t); })
        .def("eval",
             [](const couplab::MollifiedIndicator& g, py::array_t<double> ts) {
                 const auto tv = to_vec(ts);
                 couplab::Vec out(tv.size());
                 for (std::size_t i = 0; i < tv.size(); ++i) out[i] = g(tv[i]);
                 return from_vec(out);
             })
        .def("derivative_report", [](const couplab::MollifiedIndicator& g, py::array_t<double> grid,
                                     double fd_step) {
            const auto gv = to_vec(grid);
            const auto r = couplab::derivative_bound_check(g, gv, fd_step);
            return py::make_tuple(r.max_d1_scaled, r.max_d2_scaled, r.max_d3_scaled);
        });

    // rate formulas
    py::class_<couplab::ClassParams>(m, "ClassParams")
        .def(py::init([](double v, double A, double b, double sigma, double q, long long n,
                         long long N_B_eta, double eta, double gamma) {
                 couplab::ClassParams p{v, A, b, sigma, q, n, N_B_eta, eta, gamma};
                 return p;
             }),
             "v"_a = 1.0, "A"_a = 2.718281828459045, "b"_a = 1.0, "sigma"_a = 1.0, "q"_a = 4.0,
             "n"_a = 1, "N_B_eta"_a = 1, "eta"_a = 0.1, "gamma"_a = 0.1)
        .def("validate", &couplab::ClassParams::validate)
        .def_readwrite("n", &couplab::ClassParams::n);

    m.def("compute_Kn", &couplab::compute_Kn, "params"_a);
    m.def(
        "delta_rate",
        [](const couplab::ClassParams& p, const std::string& which) {
            const auto r = couplab::delta_rate(p, couplab::rate_kind_from_string(which));
            return py::make_tuple(r.value, r.side_condition_ok);
        },
        "params"_a, "which"_a, "Returns (value, side_condition_ok) for d1, d2 or d3.");
    m.def(
        "third_moment_terms",
        [](py::array_t<double> centered, double delta) {
            const auto r = couplab::third_moment_terms(to_matrix(centered), delta);
            return py::make_tuple(r.L_n, r.M_nX);
        },
        "centered"_a, "delta"_a);
    m.def("nazarov_density_bound", &couplab::nazarov_density_bound, "p"_a, "underline_sigma"_a,
          "epsilon"_a);
    m.def(
        "anticoncentration_bound",
        [](double sigma, double eps, double phi_delta, std::size_t cover_N, double delta,
           py::array_t<double> r_grid) {
            return couplab::anticoncentration_bound(sigma, eps, phi_delta, cover_N, delta,
                                                    to_vec(r_grid));
        },
        "underline_sigma"_a, "epsilon"_a, "phi_delta"_a, "cover_N"_a, "delta"_a, "r_grid"_a);
    m.def(
        "cov_discrepancy",
        [](py::array_t<double> x, py::array_t<double> y) {
            return couplab::cov_discrepancy(to_matrix(x), to_matrix(y));
        },
        "cov_x"_a, "cov_y"_a);

    // distances and coupling composition
    m.def(
        "kolmogorov_distance",
        [](py::array_t<double> a, py::array_t<double> b) {
            auto av = to_vec(a);
            auto bv = to_vec(b);
            std::sort(av.begin(), av.end());
            std::sort(bv.begin(), bv.end());
            return couplab::kolmogorov_distance(av, bv);
        },
        "sample1"_a, "sample2"_a, "Exact two-sample sup-CDF distance (inputs are sorted copies).");
    m.def("coupling_to_kolmogorov", &couplab::coupling_to_kolmogorov, "r1"_a, "r2"_a,
          "levy_concentration"_a);

    // processes
    m.def(
        "multinomial_weights",
        [](std::size_t n, std::uint64_t seed) {
            const auto w = couplab::multinomial_weights(n, seed);
            py::array_t<std::uint32_t> a(static_cast<py::ssize_t>(w.size()));
            std::copy(w.begin(), w.end(), a.mutable_data());
            return a;
        },
        "n"_a, "seed"_a);
    m.def(
        "gaussian_max_sample",
        [](py::array_t<double> cov, py::array_t<double> mean, std::size_t reps, std::uint64_t seed) {
            return from_vec(couplab::gaussian_sup_sample(model_from(cov, mean), reps, seed));
        },
        "cov"_a, "mean"_a, "reps"_a, "seed"_a,
        "Sorted sample of max_j(mean_j + G_j) with G centered Gaussian of the given covariance.");
    m.def(
        "psd_repair_jitter",
        [](py::array_t<double> cov) {
            const auto r = couplab::psd_repair(to_matrix(cov));
            return r.jitter;
        },
        "cov"_a);

    // convex-set application
    py::class_<couplab::ConvexSetSpec>(m, "ConvexSet")
        .def_static("ball",
                    [](py::array_t<double> center, double radius) {
                        couplab::ConvexSetSpec s;
                        s.kind = couplab::SetKind::ball;
                        s.center = to_vec(center);
                        s.dim = static_cast<int>(s.center.size());
                        s.radius = radius;
                        s.validate();
                        return s;
                    },
                    "center"_a, "radius"_a)
        .def_static("box",
                    [](py::array_t<double> lo, py::array_t<double> hi) {
                        couplab::ConvexSetSpec s;
                        s.kind = couplab::SetKind::box;
                        s.lo = to_vec(lo);
                        s.hi = to_vec(hi);
                        s.dim = static_cast<int>(s.lo.size());
                        s.validate();
                        return s;
                    },
                    "lo"_a, "hi"_a)
        .def_static("halfspace",
                    [](py::array_t<double> normal, double offset) {
                        couplab::ConvexSetSpec s;
                        s.kind = couplab::SetKind::halfspace;
                        s.normal = to_vec(normal);
                        s.dim = static_cast<int>(s.normal.size());
                        s.offset = offset;
                        s.validate();
                        return s;
                    },
                    "normal"_a, "offset"_a)
        .def_static("polytope",
                    [](py::array_t<double> normals, py::array_t<double> offsets) {
                        couplab::ConvexSetSpec s;
                        s.kind = couplab::SetKind::polytope;
                        s.normals = to_matrix(normals);
                        s.offsets = to_vec(offsets);
                        s.dim = static_cast<int>(s.normals.cols());
                        s.validate();
                        return s;
                    },
                    "normals"_a, "offsets"_a);
    m.def(
        "support_function",
        [](const couplab::ConvexSetSpec& s, py::array_t<double> v) {
            return couplab::support_function(s, to_vec(v));
        },
        "set"_a, "v"_a);
    m.def(
        "convex_probability",
        [](const couplab::ConvexSetSpec& s, const std::string& data, long long n, double eps,
           const std::string& method, std::size_t reps, std::uint64_t seed) {
            const auto r = couplab::convex_probability(
                s, couplab::distribution_from_string(data), n, eps,
                couplab::convex_method_from_string(method), reps, seed);
            return py::make_tuple(r.prob, r.se, r.net_bias, r.net_size);
        },
        "set"_a, "data"_a, "n"_a, "sphere_net_eps"_a, "method"_a, "reps"_a, "seed"_a,
        "Returns (prob, se, net_bias, net_size).");

    // experiment front door: JSON config in, CSV/manifest out
    m.def(
        "validate_config",
        [](const std::string& config_json) {
            const auto cfg = couplab::config::json::parse(config_json);
            const auto diag = couplab::config::validate(cfg);
            return py::make_tuple(diag.errors, diag.warnings);
        },
        "config_json"_a);
    m.def(
        "run_config",
        [](const std::string& config_json, const std::string& out_dir) {
            const auto cfg = couplab::config::json::parse(config_json);
            couplab::config::RunOptions opts;
            opts.out_dir = out_dir;
            const auto result = couplab::config::run(cfg, opts);
            return py::make_tuple(result.manifest_path, result.csv_paths);
        },
        "config_json"_a, "out_dir"_a);
    m.def("preset", &couplab::config::preset, "name"_a);
}
