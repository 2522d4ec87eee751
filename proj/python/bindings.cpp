#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "proxstair/imaging.hpp"
#include "proxstair/membrane.hpp"
#include "proxstair/prox.hpp"
#include "proxstair/rof.hpp"

namespace py = pybind11;
using namespace proxstair;

namespace {

ProxInstance make_instance(const std::vector<double>& data,
                           const std::vector<double>& weights, double gamma) {
  return prepare_instance(data, weights, gamma);
}

py::array_t<double> batch_eval(py::array_t<double, py::array::c_style> data,
                               py::array_t<double, py::array::c_style> weights,
                               py::array_t<double, py::array::c_style> gamma,
                               py::array_t<double, py::array::c_style> x) {
  if (data.ndim() != 2 || weights.ndim() != 2 || gamma.ndim() != 1 || x.ndim() != 1)
    throw Error(ErrorCode::ShapeMismatch, "expected 2-d data/weights, 1-d gamma/x");
  ProxBatch batch;
  batch.rows = static_cast<std::size_t>(data.shape(0));
  batch.width = static_cast<std::size_t>(data.shape(1));
  batch.data.assign(data.data(), data.data() + data.size());
  batch.weights.assign(weights.data(), weights.data() + weights.size());
  batch.gamma.assign(gamma.data(), gamma.data() + gamma.size());
  batch.x.assign(x.data(), x.data() + x.size());
  std::vector<double> y = prox_batch(batch);
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(y.size())};
  py::array_t<double> out(shape);
  std::copy(y.begin(), y.end(), out.mutable_data());
  return out;
}

GrayImage image_from_array(py::array_t<double, py::array::c_style> arr) {
  if (arr.ndim() != 2) throw Error(ErrorCode::ShapeMismatch, "expected 2-d image");
  GrayImage img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), img.v.begin());
  return img;
}

py::array_t<double> image_to_array(const GrayImage& img) {
  py::array_t<double> arr({img.rows, img.cols});
  std::copy(img.v.begin(), img.v.end(), arr.mutable_data());
  return arr;
}

MembraneConfig config_from_kwargs(double c, double f, double alpha,
                                  std::vector<double> thresholds,
                                  std::vector<double> forces, double rho,
                                  double tol, int max_iter) {
  MembraneConfig cfg;
  cfg.c = c;
  cfg.f = f;
  cfg.alpha = alpha;
  cfg.thresholds = std::move(thresholds);
  cfg.forces = std::move(forces);
  cfg.rho = rho;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_proxstair, m) {
  m.doc() = "multi-threshold prox kernel with ROF and membrane solvers";

  py::register_exception<Error>(m, "ProxstairError");

  m.def(
      "prox",
      [](const std::vector<double>& d, const std::vector<double>& w,
         double gamma, double x) { return prox(make_instance(d, w, gamma), x); },
      py::arg("data"), py::arg("weights"), py::arg("gamma"), py::arg("x"),
      "Exact prox of the weighted sum of absolute deviations.");
  m.def(
      "oracle_prox",
      [](const std::vector<double>& d, const std::vector<double>& w,
         double gamma, double x) {
        return oracle_prox(make_instance(d, w, gamma), x);
      },
      py::arg("data"), py::arg("weights"), py::arg("gamma"), py::arg("x"));
  m.def(
      "plateau_interval",
      [](const std::vector<double>& d, const std::vector<double>& w,
         double gamma, std::size_t k) {
        return plateau_interval(make_instance(d, w, gamma), k);
      },
      py::arg("data"), py::arg("weights"), py::arg("gamma"), py::arg("k"),
      "Closed x-interval on which prox equals the k-th data point (1-based).");
  m.def("prox_batch", &batch_eval, py::arg("data"), py::arg("weights"),
        py::arg("gamma"), py::arg("x"),
        "Rowwise prox for padded instances (zero weights mark padding).");

  m.def(
      "rof_objective",
      [](py::array_t<double, py::array::c_style> u,
         py::array_t<double, py::array::c_style> g, double beta) {
        return rof_objective(image_from_array(u), image_from_array(g), beta);
      },
      py::arg("u"), py::arg("g"), py::arg("beta"));
  m.def(
      "denoise",
      [](py::array_t<double, py::array::c_style> g, double beta,
         double tol_inner, double tol_outer, double qp_tol, int max_outer,
         int max_inner) {
        RofParams p;
        p.beta = beta;
        p.tol_inner = tol_inner;
        p.tol_outer = tol_outer;
        p.qp_tol = qp_tol;
        p.max_outer = max_outer;
        p.max_inner = max_inner;
        auto [u, rep] = denoise(image_from_array(g), p);
        py::dict report;
        report["iterations"] = rep.iterations;
        report["restarts"] = rep.restarts;
        report["converged"] = rep.converged;
        report["final_objective"] = rep.objective_trace.back();
        report["final_direction_norm"] = rep.final_direction_norm;
        return py::make_tuple(image_to_array(u), report);
      },
      py::arg("g"), py::arg("beta") = 10.0, py::arg("tol_inner") = 1e-4,
      py::arg("tol_outer") = 300.0, py::arg("qp_tol") = 1e-6,
      py::arg("max_outer") = 100, py::arg("max_inner") = 100000);
  m.def(
      "dual_reference_solve",
      [](py::array_t<double, py::array::c_style> g, double beta, double tol) {
        return image_to_array(dual_reference_solve(image_from_array(g), beta, tol));
      },
      py::arg("g"), py::arg("beta"), py::arg("tol") = 1e-6);

  m.def(
      "add_gaussian_noise",
      [](py::array_t<double, py::array::c_style> img, double sigma,
         std::uint64_t seed) {
        return image_to_array(add_gaussian_noise(image_from_array(img), sigma, seed));
      },
      py::arg("image"), py::arg("sigma"), py::arg("seed"));
  m.def(
      "read_pgm",
      [](const std::string& path) { return image_to_array(read_pgm_file(path)); },
      py::arg("path"));
  m.def(
      "write_pgm",
      [](const std::string& path, py::array_t<double, py::array::c_style> img) {
        write_pgm_file(path, image_from_array(img));
      },
      py::arg("path"), py::arg("image"));

  m.def(
      "membrane_solve",
      [](const std::string& domain, int n, double c, double f, double alpha,
         std::vector<double> thresholds, std::vector<double> forces, double rho,
         double tol, int max_iter) {
        Domain dom = domain == "l_shape" ? Domain::l_shape(n)
                                         : Domain::unit_square(n);
        TriMesh mesh = generate_mesh(dom);
        FemMatrices mats{assemble_stiffness(mesh, c, alpha),
                         assemble_lumped_mass(mesh)};
        MembraneConfig cfg = config_from_kwargs(
            c, f, alpha, std::move(thresholds), std::move(forces), rho, tol,
            max_iter);
        auto [z, rep] = admm_solve(mats, cfg);
        py::dict report;
        report["iterations"] = rep.iterations;
        report["converged"] = rep.converged;
        report["energy"] = rep.energy_max_form;
        report["optimality_residual"] = optimality_residual(z, mats, cfg, 1e-7);
        py::list coords;
        for (const auto& v : mesh.vertices)
          coords.append(py::make_tuple(v[0], v[1]));
        return py::make_tuple(z, report, coords);
      },
      py::arg("domain") = "unit_square", py::arg("n") = 8, py::arg("c") = 1.0,
      py::arg("f") = 0.5, py::arg("alpha") = 10.0,
      py::arg("thresholds") = std::vector<double>{0.01, 0.02, 0.03, 0.04},
      py::arg("forces") = std::vector<double>{0.02, 0.02, 0.02, 0.02},
      py::arg("rho") = 100.0, py::arg("tol") = 1e-12, py::arg("max_iter") = 10000);
}
