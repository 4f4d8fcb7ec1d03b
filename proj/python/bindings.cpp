#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hallsim/bands.hpp"
#include "hallsim/commands.hpp"
#include "hallsim/config.hpp"
#include "hallsim/disorder.hpp"
#include "hallsim/error.hpp"
#include "hallsim/mourre.hpp"
#include "hallsim/resolvent.hpp"
#include "hallsim/special.hpp"

namespace py = pybind11;
using namespace hallsim;

namespace {

Geometry geometry_from(const std::string& kind, double R, double L) {
  if (kind == "cylinder") return Cylinder{R, L};
  if (kind == "edge") return HalfPlaneEdge{};
  if (kind == "dirichlet") return HalfPlaneDirichlet{};
  if (kind == "corbino") return Corbino{R};
  throw py::value_error("unknown geometry '" + kind + "'");
}

py::dict ledger_dict(const ConstantsLedger& l) {
  py::dict d;
  d["C1"] = l.C1;
  d["C2"] = l.C2;
  d["C3"] = l.C3;
  d["C4"] = l.C4;
  d["D1"] = l.D1;
  d["D2"] = l.D2;
  d["D3"] = l.D3;
  d["lambda"] = l.lambda;
  d["alpha_tilde"] = l.alpha_tilde;
  d["eta"] = l.eta;
  d["eps"] = l.eps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hallsim, m) {
  m.doc() = "Quantum Hall edge-state simulations";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<Error>(m, "NumericalError", PyExc_RuntimeError);

  m.def("commands", &command_names);

  m.def(
      "run",
      [](const std::string& command, const std::string& config_text, std::vector<std::uint64_t> seeds, int threads) {
        auto c = Config::parse_string(config_text);
        CommandOptions o;
        o.seeds = std::move(seeds);
        o.threads = threads;
        Outputs out;
        {
          py::gil_scoped_release release;
          out = run_command(command, c, o);
        }
        py::dict d;
        for (const auto& [name, content] : out) d[py::str(name)] = content;
        return d;
      },
      py::arg("command"), py::arg("config"), py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("threads") = 1,
      "Run a command on config text; returns {file name: contents}.");

  m.def(
      "channel_energies",
      [](const std::string& geometry, double kappa, double lo, double hi, std::size_t n, std::size_t count, double B,
         double R, double L, double strength, double scale, double power) {
        Geometry g = geometry_from(geometry, R, L);
        EdgeProfile edge = geometry == "dirichlet" ? EdgeProfile::flat() : EdgeProfile::power_law(strength, scale, power);
        Grid1D grid = geometry == "corbino" ? Grid1D::radial(hi, n) : Grid1D::nodal(lo, hi, n);
        auto ch = channel_hamiltonian(g, Units(B), edge, kappa, grid);
        std::vector<double> e;
        for (const auto& p : solve_channel(ch, count)) e.push_back(p.energy);
        return e;
      },
      py::arg("geometry"), py::arg("kappa"), py::arg("lo"), py::arg("hi"), py::arg("n"), py::arg("count") = 3,
      py::arg("B") = 1.0, py::arg("R") = 8.0, py::arg("L") = std::numeric_limits<double>::infinity(),
      py::arg("strength") = 1.0, py::arg("scale") = 1.0, py::arg("power") = 2.0);

  m.def(
      "free_resolvent",
      [](std::pair<double, double> x, std::pair<double, double> y, double energy, double B) {
        return free_resolvent_kernel({x.first, x.second}, {y.first, y.second}, ResolventParams::make(energy, B));
      },
      py::arg("x"), py::arg("y"), py::arg("energy"), py::arg("B") = 1.0);
  m.def(
      "kernel_modulus",
      [](double d, double energy, double B) { return kernel_modulus(d, ResolventParams::make(energy, B)); },
      py::arg("distance"), py::arg("energy"), py::arg("B") = 1.0);

  m.def(
      "constants_ledger",
      [](double center, double half_width, double strength, double scale, double power) {
        auto w = SpectralWindow::make(Units(1.0), center, half_width);
        auto l = constants_ledger(EdgeProfile::power_law(strength, scale, power), w);
        auto d = ledger_dict(l);
        d["delta_threshold"] = disorder_threshold(l, center, w.width());
        return d;
      },
      py::arg("center") = 2.0, py::arg("half_width") = 0.1, py::arg("strength") = 1.0, py::arg("scale") = 1.0,
      py::arg("power") = 2.0);

  m.def(
      "disorder_field",
      [](std::uint64_t seed, double delta, double corr, double circumference, std::size_t nx, double lo, double hi,
         std::size_t ny) {
        auto f = generate(seed, delta, corr, Grid2D{circumference, nx, Grid1D::nodal(lo, hi, ny)});
        py::array_t<double> a({ny, nx});
        std::copy(f.values().begin(), f.values().end(), a.mutable_data());
        return a;
      },
      py::arg("seed"), py::arg("delta"), py::arg("corr"), py::arg("circumference"), py::arg("nx"), py::arg("lo"),
      py::arg("hi"), py::arg("ny"));

  m.def("tricomi_psi", &tricomi_psi, py::arg("a"), py::arg("z"));
  m.def("laguerre", &laguerre, py::arg("n"), py::arg("z"));
  m.def("digamma", &digamma, py::arg("x"));
}
