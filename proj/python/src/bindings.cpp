#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdodmd/analysis.hpp"
#include "fdodmd/fourier.hpp"
#include "fdodmd/noise.hpp"
#include "fdodmd/odmd.hpp"
#include "fdodmd/spectral_model.hpp"

namespace py = pybind11;
using namespace fdodmd;

namespace {

using ComplexArray = py::array_t<complex, py::array::c_style | py::array::forcecast>;

Trajectory to_trajectory(const ComplexArray& samples, double dt, bool real_only) {
  if (samples.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  const auto view = samples.unchecked<1>();
  std::vector<complex> v(static_cast<std::size_t>(view.shape(0)));
  for (py::ssize_t k = 0; k < view.shape(0); ++k) {
    v[static_cast<std::size_t>(k)] = real_only ? complex(view(k).real(), 0.0) : view(k);
  }
  return Trajectory(std::move(v), dt, real_only);
}

ComplexArray to_array(std::span<const complex> samples) {
  ComplexArray out(static_cast<py::ssize_t>(samples.size()));
  std::copy(samples.begin(), samples.end(), out.mutable_data());
  return out;
}

OdmdOptions options(double delta, double floor, std::optional<int> delay) {
  OdmdOptions o;
  o.delta = delta;
  o.magnitude_floor = floor;
  o.delay = delay;
  return o;
}

}  // namespace

PYBIND11_MODULE(_fdodmd, m) {
  m.doc() = "Ground-state energy estimation by observable DMD with Fourier denoising";

  py::class_<RescaleParams>(m, "RescaleParams")
      .def_readonly("beta0", &RescaleParams::beta0)
      .def_readonly("beta1", &RescaleParams::beta1)
      .def_readonly("alpha", &RescaleParams::alpha)
      .def_readonly("dt", &RescaleParams::dt)
      .def_readonly("lower_bound", &RescaleParams::lower_bound)
      .def_readonly("upper_bound", &RescaleParams::upper_bound)
      .def("forward", &RescaleParams::forward);

  m.def(
      "rescale_spectrum",
      [](std::vector<double> raw, double dt, double alpha) {
        auto r = rescale_spectrum(raw, dt, alpha);
        return py::make_tuple(r.params, r.eigenvalues);
      },
      py::arg("raw"), py::arg("dt") = 1.0, py::arg("alpha") = kDefaultAlpha,
      "Returns (params, rescaled eigenvalues).");
  m.def("unscale_energy", &unscale_energy, py::arg("energy"), py::arg("params"));
  m.def("make_reference_overlaps", &make_reference_overlaps, py::arg("n_levels"), py::arg("p0"));
  m.def("ladder_levels", &ladder_levels, py::arg("n_levels"), py::arg("gap"), py::arg("width"));
  m.def("random_levels", &random_levels, py::arg("n_levels"), py::arg("gap"), py::arg("width"),
        py::arg("seed"));

  m.def(
      "signal",
      [](std::vector<double> eigs, std::vector<double> overlaps, std::size_t n, double dt,
         double theta, bool real_only) {
        const Spectrum spec(std::move(eigs), std::move(overlaps));
        return to_array(depolarized_signal(spec, theta, dt, n, real_only).samples());
      },
      py::arg("eigenvalues"), py::arg("overlaps"), py::arg("n_samples"), py::arg("dt") = 1.0,
      py::arg("theta") = 0.0, py::arg("real_only") = false);

  m.def(
      "gaussian_corrupt",
      [](const ComplexArray& s, double epsilon, std::uint64_t seed, bool real_only) {
        return to_array(gaussian_corrupt(to_trajectory(s, 1.0, real_only), epsilon, seed).samples());
      },
      py::arg("samples"), py::arg("epsilon"), py::arg("seed"), py::arg("real_only") = false);
  m.def(
      "shot_sample",
      [](const ComplexArray& s, std::int64_t shots, std::uint64_t seed, bool real_only) {
        return to_array(shot_sample(to_trajectory(s, 1.0, real_only), shots, seed).samples());
      },
      py::arg("samples"), py::arg("shots_per_step"), py::arg("seed"), py::arg("real_only") = false);
  m.def(
      "optimal_shot_allocation",
      [](std::vector<double> s, std::int64_t total) {
        return optimal_shot_allocation(s, total).counts;
      },
      py::arg("signal_re"), py::arg("total"));

  m.def("dft", [](const ComplexArray& x) {
    return to_array(dft(std::span(x.data(), static_cast<std::size_t>(x.size()))));
  });
  m.def("idft", [](const ComplexArray& x) {
    return to_array(idft(std::span(x.data(), static_cast<std::size_t>(x.size()))));
  });
  m.def(
      "threshold_denoise",
      [](const ComplexArray& d, double gamma, bool real_only) {
        return to_array(threshold_denoise(to_trajectory(d, 1.0, real_only), ThresholdRule(gamma))
                            .samples());
      },
      py::arg("samples"), py::arg("gamma"), py::arg("real_only") = false);
  m.def(
      "threshold_denoise_absolute",
      [](const ComplexArray& d, double tau, bool real_only) {
        return to_array(threshold_denoise_absolute(to_trajectory(d, 1.0, real_only), tau).samples());
      },
      py::arg("samples"), py::arg("tau"), py::arg("real_only") = false);

  m.def(
      "build_hankel",
      [](const std::vector<ComplexArray>& trajs, int d_delay, int k_len, bool real_only) {
        std::vector<Trajectory> t;
        for (const auto& a : trajs) t.push_back(to_trajectory(a, 1.0, real_only));
        const auto pair = build_hankel(t, d_delay, k_len);
        return py::make_tuple(pair.x(), pair.x_shift());
      },
      py::arg("trajectories"), py::arg("d_delay"), py::arg("k_len"), py::arg("real_only") = false,
      "Returns (X, X') as complex matrices.");

  py::class_<GseEstimate>(m, "GseEstimate")
      .def_readonly("energy", &GseEstimate::energy)
      .def_readonly("theta", &GseEstimate::theta)
      .def_readonly("selected_eigenvalue", &GseEstimate::selected_eigenvalue)
      .def_readonly("all_energies", &GseEstimate::all_energies)
      .def_readonly("all_damping", &GseEstimate::all_damping)
      .def_readonly("rank_kept", &GseEstimate::rank_kept)
      .def("__repr__", [](const GseEstimate& e) {
        return "GseEstimate(energy=" + std::to_string(e.energy) +
               ", theta=" + std::to_string(e.theta) + ", rank_kept=" + std::to_string(e.rank_kept) + ")";
      });

  m.def(
      "odmd_estimate",
      [](const ComplexArray& d, int k_len, double delta, double dt, bool real_only, double floor,
         std::optional<int> delay) {
        return odmd_estimate(to_trajectory(d, dt, real_only), k_len, options(delta, floor, delay));
      },
      py::arg("samples"), py::arg("k_len"), py::arg("delta"), py::arg("dt") = 1.0,
      py::arg("real_only") = false, py::arg("magnitude_floor") = kDefaultMagnitudeFloor,
      py::arg("delay") = py::none());
  m.def(
      "fdodmd_estimate",
      [](const ComplexArray& d, std::vector<double> gammas, bool include_raw, int k_len,
         double delta, double dt, bool real_only, double floor, std::optional<int> delay) {
        return fdodmd_estimate(to_trajectory(d, dt, real_only), gammas, include_raw, k_len,
                               options(delta, floor, delay));
      },
      py::arg("samples"), py::arg("gammas"), py::arg("include_raw"), py::arg("k_len"),
      py::arg("delta"), py::arg("dt") = 1.0, py::arg("real_only") = false,
      py::arg("magnitude_floor") = kDefaultMagnitudeFloor, py::arg("delay") = py::none());

  m.def(
      "convergence_sweep",
      [](const ComplexArray& d, const std::string& method, double true_e0, std::vector<int> k_grid,
         double delta, std::vector<double> gammas, bool include_raw, int pad_factor, bool real_only) {
        EstimatorSpec spec;
        spec.odmd.delta = delta;
        if (method == "odmd") {
          spec.method = OdmdMethod{};
        } else if (method == "fdodmd") {
          spec.method = FdodmdMethod{gammas, include_raw};
        } else if (method == "dft") {
          spec.method = DftPeakMethod{};
        } else if (method == "zeropad") {
          spec.method = ZeroPadMethod{pad_factor};
        } else {
          throw std::invalid_argument("unknown method '" + method + "'");
        }
        const auto curve = convergence_sweep(to_trajectory(d, 1.0, real_only), spec, true_e0, k_grid);
        std::vector<int> ks;
        std::vector<double> errors;
        for (const auto& p : curve.points) {
          ks.push_back(p.k_len);
          errors.push_back(p.abs_error);
        }
        return py::make_tuple(ks, errors);
      },
      py::arg("samples"), py::arg("method"), py::arg("true_e0"), py::arg("k_grid"),
      py::arg("delta") = 0.1, py::arg("gammas") = std::vector<double>{},
      py::arg("include_raw") = true, py::arg("pad_factor") = 0, py::arg("real_only") = false,
      "Returns (k values, absolute errors); failed points carry inf.");

  m.def(
      "theorem1_rhs",
      [](const ComplexArray& s_hat, double tau, double epsilon) {
        return theorem1_rhs(std::span(s_hat.data(), static_cast<std::size_t>(s_hat.size())), tau,
                            epsilon);
      },
      py::arg("s_hat"), py::arg("tau"), py::arg("epsilon"));
  m.def(
      "theorem1_lhs_mc",
      [](const ComplexArray& s, double tau, double epsilon, int trials, std::uint64_t seed) {
        const auto stat = theorem1_lhs_mc(to_trajectory(s, 1.0, false), tau, epsilon, trials, seed);
        return py::make_tuple(stat.mean, stat.std);
      },
      py::arg("signal"), py::arg("tau"), py::arg("epsilon"), py::arg("trials"), py::arg("seed"));
}
