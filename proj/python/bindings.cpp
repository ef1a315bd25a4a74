#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "rwpm/homogeneous.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/runner.hpp"

namespace py = pybind11;
using namespace rwpm;

PYBIND11_MODULE(_core, m)
{
    m.doc() = "random walk pinning: kernels, homogeneous model, renewal statistics, runner";
    m.attr("__version__") = kVersion;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<JumpKernel>(m, "JumpKernel")
        .def_property_readonly("dim", &JumpKernel::dim)
        .def_property_readonly("gamma", &JumpKernel::gamma)
        .def_property_readonly("alpha", &JumpKernel::alpha)
        .def_property_readonly("transient", &JumpKernel::transient)
        .def("prob", py::overload_cast<std::int64_t>(&JumpKernel::prob, py::const_))
        .def("char_exponent", py::overload_cast<double>(&JumpKernel::char_exponent, py::const_))
        .def("__repr__", &JumpKernel::describe);
    m.def("srw_kernel", &make_srw_kernel, py::arg("d"));
    m.def(
        "stable_kernel",
        [](double gamma, double kappa, std::int64_t radius) {
            return make_stable_kernel(gamma, kappa == 0 ? PhiSpec::constant() : PhiSpec::log_power(kappa),
                                      radius);
        },
        py::arg("gamma"), py::arg("kappa") = 0.0, py::arg("truncation_radius") = 1'000'000);

    py::class_<TransitionEngine>(m, "TransitionEngine")
        .def(py::init([](const JumpKernel& k) { return std::make_unique<TransitionEngine>(k); }))
        .def_property_readonly("alpha", &TransitionEngine::alpha)
        .def_property_readonly("transient", &TransitionEngine::transient)
        .def("beta0", &TransitionEngine::beta0)
        .def("return_prob", &TransitionEngine::return_prob)
        .def("transition_prob",
             py::overload_cast<double, std::int64_t>(&TransitionEngine::transition_prob, py::const_))
        .def("K", &TransitionEngine::K)
        .def("k_prime_ratio", &TransitionEngine::k_prime_ratio);

    m.def("solve_free_energy", &solve_free_energy, py::arg("engine"), py::arg("beta"));

    py::class_<FreeEnergyTable>(m, "FreeEnergyTable")
        .def(py::init<const TransitionEngine&, double>(), py::keep_alive<1, 2>())
        .def_property_readonly("beta", &FreeEnergyTable::beta)
        .def_property_readonly("F", &FreeEnergyTable::F)
        .def_property_readonly("F_prime", &FreeEnergyTable::F_prime)
        .def_property_readonly("mean_gap", &FreeEnergyTable::mean_gap)
        .def("K_beta", &FreeEnergyTable::K_beta)
        .def("K_beta_bar", &FreeEnergyTable::K_beta_bar);

    m.def(
        "overlap_stats",
        [](const std::vector<double>& tau, const std::vector<double>& tau_p, double a, double b,
           const std::vector<double>& h_list, bool skip_first) {
            auto s = overlap_stats(tau, tau_p, a, b, h_list, skip_first);
            py::dict d;
            d["j1"] = s.j1;
            d["j2"] = s.j2;
            d["frak_j"] = s.frak_j;
            d["frak_j_prime"] = s.frak_j_prime;
            d["n_h"] = s.n_h;
            return d;
        },
        py::arg("tau"), py::arg("tau_p"), py::arg("a"), py::arg("b"),
        py::arg("h_list") = std::vector<double>{}, py::arg("skip_first") = true);
    m.def(
        "iterated_overshoots",
        [](const std::vector<double>& tau, const std::vector<double>& tau_p, double T,
           std::size_t first, std::size_t first_p) {
            auto tr = iterated_overshoots(tau, tau_p, T, first, first_p);
            py::dict d;
            d["T"] = tr.T;
            d["S"] = tr.S;
            d["D"] = tr.D;
            d["truncated"] = tr.truncated;
            return d;
        },
        py::arg("tau"), py::arg("tau_p"), py::arg("T"), py::arg("first") = 1,
        py::arg("first_p") = 1);

    m.def("experiment_names", &experiment_names);
    m.def("_validate", [](const std::string& cfg) {
        std::vector<std::string> out;
        for (const auto& d : validate_config(nlohmann::json::parse(cfg)))
            out.push_back(d.str());
        return out;
    });
    m.def(
        "_run",
        [](const std::string& cfg, const std::string& out_dir, int workers) {
            RunOptions o;
            o.out_dir = out_dir;
            o.workers = workers;
            o.quiet = true;
            RunResult r;
            {
                py::gil_scoped_release nogil;
                r = run_experiment(nlohmann::json::parse(cfg), o);
            }
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["files"] = r.files;
            d["error"] = r.error;
            d["manifest"] = r.manifest.dump();
            return d;
        },
        py::arg("config"), py::arg("out_dir") = "", py::arg("workers") = 0);
}
