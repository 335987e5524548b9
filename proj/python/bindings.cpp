#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sbcrb/asymptotics.hpp"
#include "sbcrb/design.hpp"
#include "sbcrb/errors.hpp"
#include "sbcrb/exact_crb.hpp"
#include "sbcrb/montecarlo.hpp"

namespace py = pybind11;
using namespace sbcrb;

PYBIND11_MODULE(_sbcrb, m) {
  m.doc() = "Cramer-Rao bounds for semi-blind massive MIMO channel estimation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<SingularGram>(m, "SingularGram", base.ptr());
  py::register_exception<Infeasible>(m, "Infeasible", base.ptr());
  py::register_exception<NoConvergence>(m, "NoConvergence", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());

  py::class_<SystemDims>(m, "SystemDims")
      .def(py::init<int, int, int, int>(), py::arg("M"), py::arg("K"), py::arg("L"), py::arg("N"))
      .def_readwrite("M", &SystemDims::M)
      .def_readwrite("K", &SystemDims::K)
      .def_readwrite("L", &SystemDims::L)
      .def_readwrite("N", &SystemDims::N)
      .def("__repr__", [](const SystemDims& d) {
        return "SystemDims(M=" + std::to_string(d.M) + ", K=" + std::to_string(d.K) + ", L=" + std::to_string(d.L) +
               ", N=" + std::to_string(d.N) + ")";
      });

  py::class_<PowerConfig>(m, "PowerConfig")
      .def(py::init<double, double, double>(), py::arg("P") = 1.0, py::arg("Ps") = 1.0, py::arg("sigma_v2") = 1.0)
      .def_readwrite("P", &PowerConfig::P)
      .def_readwrite("Ps", &PowerConfig::Ps)
      .def_readwrite("sigma_v2", &PowerConfig::sigma_v2);

  py::class_<AsymptoticRatios>(m, "AsymptoticRatios")
      .def(py::init<double, double, double>(), py::arg("c"), py::arg("alpha"), py::arg("beta"))
      .def_readwrite("c", &AsymptoticRatios::c)
      .def_readwrite("alpha", &AsymptoticRatios::alpha)
      .def_readwrite("beta", &AsymptoticRatios::beta);

  py::class_<StieltjesSolution>(m, "StieltjesSolution")
      .def_readonly("value", &StieltjesSolution::value)
      .def_readonly("iterations", &StieltjesSolution::iterations)
      .def_readonly("residual", &StieltjesSolution::residual);

  py::enum_<PilotScheme>(m, "PilotScheme")
      .value("training", PilotScheme::Training)
      .value("semiblind_det", PilotScheme::SemiblindDet)
      .value("semiblind_stoch", PilotScheme::SemiblindStoch);

  py::class_<DesignSolution>(m, "DesignSolution")
      .def_readonly("value", &DesignSolution::value)
      .def_readonly("feasible", &DesignSolution::feasible)
      .def_readonly("residual", &DesignSolution::residual)
      .def_readonly("achieved", &DesignSolution::achieved)
      .def_readonly("printed_feasibility", &DesignSolution::printed_feasibility);

  m.def("derive_ratios", &derive_ratios, py::arg("dims"));
  m.def("snr_db_to_noise_variance", &snr_db_to_noise_variance, py::arg("snr_db"));
  m.def("make_orthogonal_pilots", &make_orthogonal_pilots, py::arg("K"), py::arg("L"), py::arg("P"));
  m.def("gram_spectrum", [](const CMatrix& G) { return gram_spectrum(G); }, py::arg("G"));

  // finite-size bounds
  m.def(
      "det_crb_avg",
      [](const CMatrix& Sp, const CMatrix& Sd, int M, double s2) {
        const SignalBlock b(Sp, Sd);
        return det_crb_avg(b, {M, b.K(), b.L(), b.N()}, s2).value;
      },
      py::arg("Sp"), py::arg("Sd"), py::arg("M"), py::arg("sigma_v2"));
  m.def(
      "det_crb_avg_oracle",
      [](const CMatrix& Sp, const CMatrix& Sd, const CMatrix& G, double s2) {
        return det_crb_avg_oracle(Sp, Sd, G, s2).value;
      },
      py::arg("Sp"), py::arg("Sd"), py::arg("G"), py::arg("sigma_v2"));
  m.def(
      "stoch_crb_avg",
      [](const RVector& spectrum, const SystemDims& d, const PowerConfig& p) {
        return stoch_crb_avg_closed(spectrum, d, p).value;
      },
      py::arg("spectrum"), py::arg("dims"), py::arg("powers"));
  m.def(
      "stoch_crb_avg_fim_oracle",
      [](const CMatrix& G, const SystemDims& d, const PowerConfig& p) { return stoch_crb_avg_fim_oracle(G, d, p).value; },
      py::arg("G"), py::arg("dims"), py::arg("powers"));

  // large-system limits
  m.def(
      "fixed_point_m0",
      [](const RVector& lam, const AsymptoticRatios& r, double Ps) { return fixed_point_m0(lam, r, Ps); },
      py::arg("pilot_eigs"), py::arg("ratios"), py::arg("Ps"));
  m.def("m0_closed_identity", &m0_closed_identity, py::arg("P"), py::arg("Ps"), py::arg("ratios"));
  m.def(
      "det_crb_asymptotic",
      [](const AsymptoticRatios& r, const PowerConfig& p) { return det_crb_asymptotic(r, p).value; }, py::arg("ratios"),
      py::arg("powers"));
  m.def(
      "stoch_crb_asymptotic",
      [](const AsymptoticRatios& r, const PowerConfig& p, int nodes) { return stoch_crb_asymptotic_mp(r, p, nodes).value; },
      py::arg("ratios"), py::arg("powers"), py::arg("nodes") = kMpDefaultNodes);
  m.def("mp_stieltjes", &mp_stieltjes, py::arg("z"), py::arg("c"));

  // design
  m.def("solve_beta_for_mse", &solve_beta_for_mse, py::arg("target_mse"), py::arg("powers"), py::arg("c"),
        py::arg("alpha"));
  m.def("solve_power_for_mse", &solve_power_for_mse, py::arg("target_mse"), py::arg("beta"), py::arg("Ps"),
        py::arg("c"), py::arg("alpha"), py::arg("sigma_v2"));
  m.def(
      "required_pilots",
      [](double gamma, int M, int K, int N, const PowerConfig& p, PilotScheme s, std::optional<RVector> spectrum) {
        return required_pilots(gamma, M, K, N, p, s, spectrum);
      },
      py::arg("gamma"), py::arg("M"), py::arg("K"), py::arg("N"), py::arg("powers"), py::arg("scheme"),
      py::arg("spectrum") = py::none());

  // simulation
  m.def(
      "gen_channel_iid", [](int M, int K, std::uint64_t seed) { return gen_channel_iid(M, K, seed).G(); },
      py::arg("M"), py::arg("K"), py::arg("seed"));
  m.def("ncae", &ncae, py::arg("crb_true"), py::arg("crb_asym"));
}
