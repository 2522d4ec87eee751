#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "proxstair/batch_io.hpp"
#include "proxstair/box_qp.hpp"
#include "proxstair/imaging.hpp"
#include "proxstair/membrane.hpp"
#include "proxstair/prox.hpp"
#include "proxstair/rof.hpp"

namespace {

using json = nlohmann::json;
using namespace proxstair;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;

constexpr const char* kReportSchema = "proxstair-report-v1";

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot open input file: " << path << "\n";
    std::exit(kExitIo);
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << path << "\n";
    std::exit(kExitIo);
  }
  return out;
}

int run_prox_eval(const std::string& input, const std::string& output) {
  auto in = open_input(input);
  try {
    BatchCsv csv = read_batch_csv(in);
    if (csv.batch.rows == 0) {
      std::cerr << "empty data section\n";
      return kExitInput;
    }
    std::vector<double> y = prox_batch(csv.batch);
    auto out = open_output(output);
    write_batch_csv(out, csv, y);
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }
}

int run_stair_plot(const std::string& instance_path, double xmin, double xmax,
                   int samples, const std::string& output) {
  if (samples < 2 || !(xmin < xmax)) {
    std::cerr << "need samples >= 2 and xmin < xmax\n";
    return kExitInput;
  }
  auto in = open_input(instance_path);
  try {
    BatchCsv csv = read_batch_csv(in);
    if (csv.batch.rows != 1) {
      std::cerr << "stair-plot expects exactly one instance row\n";
      return kExitInput;
    }
    ProxInstance inst;
    inst.gamma = csv.batch.gamma[0];
    inst.data.assign(csv.batch.data.begin(),
                     csv.batch.data.begin() + csv.batch.width);
    inst.weights.assign(csv.batch.weights.begin(),
                        csv.batch.weights.begin() + csv.batch.width);

    auto out = open_output(output);
    out << "kind,x,y\n";
    for (int s = 0; s < samples; ++s) {
      double x = xmin + (xmax - xmin) * s / (samples - 1);
      out << "sample," << format_double(x) << ',' << format_double(prox(inst, x))
          << '\n';
    }
    for (std::size_t k = 1; k <= inst.size(); ++k) {
      if (inst.weights[k - 1] == 0.0) continue;
      auto [lo, hi] = plateau_interval(inst, k);
      out << "plateau," << format_double(lo) << ','
          << format_double(inst.data[k - 1]) << '\n';
      out << "plateau," << format_double(hi) << ','
          << format_double(inst.data[k - 1]) << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }
}

json denoise_report_json(const DenoiseReport& rep) {
  return json{{"schema", kReportSchema},
              {"iterations", rep.iterations},
              {"inner_iterations", rep.inner_iterations},
              {"restarts", rep.restarts},
              {"converged", rep.converged},
              {"final_direction_norm", rep.final_direction_norm},
              {"final_objective", rep.objective_trace.back()},
              {"objective_trace", rep.objective_trace},
              {"prox_calls", rep.prox_calls},
              {"qp_calls", rep.qp_calls},
              {"time_prox_s", rep.time_prox_s},
              {"time_qp_s", rep.time_qp_s},
              {"time_total_s", rep.time_total_s}};
}

int run_denoise(const std::string& input, const std::string& output,
                const RofParams& params, const std::string& report_path) {
  if (!(params.beta > 0) || !(params.tol_inner > 0) || !(params.tol_outer > 0)) {
    std::cerr << "beta and tolerances must be positive\n";
    return kExitInput;
  }
  auto in = open_input(input);
  GrayImage g;
  try {
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    g = read_pgm(bytes);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }

  auto write_report = [&](const DenoiseReport& rep) {
    if (report_path.empty()) return;
    auto rout = open_output(report_path);
    rout << denoise_report_json(rep).dump(2) << "\n";
  };

  try {
    auto [u, rep] = denoise(g, params);
    write_pgm_file(output, u);
    write_report(rep);
    return kExitOk;
  } catch (const DenoiseFailure& e) {
    std::cerr << e.what() << "\n";
    write_pgm_file(output, e.best);
    write_report(e.report);
    return kExitNoConvergence;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::NoConvergence ? kExitNoConvergence : kExitInput;
  }
}

int run_membrane(const std::string& config_path, const std::string& output,
                 const std::string& report_path) {
  auto in = open_input(config_path);
  Domain domain;
  MembraneConfig cfg;
  try {
    json jc = json::parse(in);
    std::string dom = jc.value("domain", "unit_square");
    if (dom == "unit_square")
      domain.kind = DomainKind::UnitSquare;
    else if (dom == "l_shape")
      domain.kind = DomainKind::LShape;
    else
      throw Error(ErrorCode::Format, "unknown domain: " + dom);
    domain.n = jc.value("n", 8);
    cfg.c = jc.value("c", 1.0);
    cfg.f = jc.value("f", 0.5);
    cfg.alpha = jc.value("alpha", 10.0);
    cfg.thresholds = jc.value("thresholds", std::vector<double>{});
    cfg.forces = jc.value("forces", std::vector<double>{});
    cfg.rho = jc.value("rho", 100.0);
    cfg.tol = jc.value("tol", 1e-12);
    cfg.max_iter = jc.value("max_iter", 10000);
    if (cfg.thresholds.size() != cfg.forces.size())
      throw Error(ErrorCode::Format, "thresholds/forces length mismatch");
    if (!std::is_sorted(cfg.thresholds.begin(), cfg.thresholds.end()))
      throw Error(ErrorCode::Format, "thresholds must be ascending");
  } catch (const json::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }

  TriMesh mesh;
  FemMatrices mats;
  try {
    mesh = generate_mesh(domain);
    mats.K = assemble_stiffness(mesh, cfg.c, cfg.alpha);
    mats.M = assemble_lumped_mass(mesh);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }

  auto write_outputs = [&](const Eigen::VectorXd& z, const AdmmReport& rep) {
    double residual = optimality_residual(z, mats, cfg, 1e-7);
    auto out = open_output(output);
    out << "x,y,z_value,active_count\n";
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      int active = 0;
      for (double d : cfg.thresholds)
        if (z[v] >= d) ++active;
      out << format_double(mesh.vertices[v][0]) << ','
          << format_double(mesh.vertices[v][1]) << ',' << format_double(z[v])
          << ',' << active << '\n';
    }
    if (!report_path.empty()) {
      Eigen::VectorXd fvec = cfg.force_vector(mesh.vertex_count());
      json jr{{"schema", kReportSchema},
              {"vertices", mesh.vertex_count()},
              {"triangles", mesh.triangles.size()},
              {"iterations", rep.iterations},
              {"converged", rep.converged},
              {"exact_fixed_point", rep.exact_fixed_point},
              {"last_increment", rep.last_increment},
              {"energy_max_form", rep.energy_max_form},
              {"energy_abs_form", rep.energy_abs_form},
              {"optimality_residual", residual},
              {"force_norm", mats.M.cwiseProduct(fvec).norm()}};
      auto rout = open_output(report_path);
      rout << jr.dump(2) << "\n";
    }
  };

  try {
    auto [z, rep] = admm_solve(mats, cfg);
    write_outputs(z, rep);
    return kExitOk;
  } catch (const AdmmFailure& e) {
    std::cerr << e.what() << "\n";
    write_outputs(e.best, e.report);
    return kExitNoConvergence;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::NoConvergence ? kExitNoConvergence : kExitInput;
  }
}

int run_bench(int pixels, int repeats, const std::string& output) {
  if (pixels < 1 || repeats < 1) {
    std::cerr << "pixels and repeats must be >= 1\n";
    return kExitInput;
  }
  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(0.0, 255.0);

  // batched prox: `pixels` instances of width 4, as in the checkerboard sweep
  ProxBatch batch;
  batch.rows = static_cast<std::size_t>(pixels);
  batch.width = 4;
  batch.gamma.assign(batch.rows, 10.0);
  batch.x.resize(batch.rows);
  batch.data.resize(batch.rows * 4);
  batch.weights.assign(batch.rows * 4, 1.0);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    double d[4] = {uni(rng), uni(rng), uni(rng), uni(rng)};
    std::sort(d, d + 4);
    std::copy(d, d + 4, batch.data.begin() + r * 4);
    batch.x[r] = uni(rng);
  }
  auto t0 = Clock::now();
  double sink = 0.0;
  for (int rep = 0; rep < repeats; ++rep) sink += prox_batch(batch)[0];
  double prox_total = std::chrono::duration<double>(Clock::now() - t0).count();

  // one subgradient-projection QP on a matching square image
  int side = std::max(2, static_cast<int>(std::lround(std::sqrt(2.0 * pixels))));
  GrayImage g(side, side);
  for (auto& v : g.v) v = uni(rng);
  GrayImage u = dual_reference_solve(g, 10.0, 1e-2, 200000);
  auto t1 = Clock::now();
  GrayImage dir = steepest_descent_direction(u, g, 10.0, 1e-2, 2000000);
  double qp_total = std::chrono::duration<double>(Clock::now() - t1).count();
  sink += dir.v[0];

  auto out = open_output(output);
  out << "subroutine,calls,total_time,time_per_call\n";
  out << "prox_batch," << repeats << ',' << format_double(prox_total) << ','
      << format_double(prox_total / repeats) << '\n';
  out << "box_qp,1," << format_double(qp_total) << ',' << format_double(qp_total)
      << '\n';
  if (!std::isfinite(sink)) std::cerr << "unexpected non-finite result\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-threshold prox kernel, ROF denoiser and membrane solver"};
  app.require_subcommand(1);

  std::string input, output, report, instance, config;
  double xmin = -2.0, xmax = 2.0;
  int samples = 101;
  RofParams params;
  int pixels = 32768, repeats = 1;

  auto* prox_eval = app.add_subcommand("prox-eval", "evaluate a batch CSV");
  prox_eval->add_option("--input", input)->required();
  prox_eval->add_option("--output", output)->required();

  auto* stair = app.add_subcommand("stair-plot", "sample prox over an interval");
  stair->add_option("--instance", instance)->required();
  stair->add_option("--xmin", xmin);
  stair->add_option("--xmax", xmax);
  stair->add_option("--samples", samples);
  stair->add_option("--output", output)->required();

  auto* den = app.add_subcommand("denoise", "checkerboard ROF denoiser");
  den->add_option("--input", input)->required();
  den->add_option("--output", output)->required();
  den->add_option("--beta", params.beta);
  den->add_option("--tol-inner", params.tol_inner);
  den->add_option("--tol-outer", params.tol_outer);
  den->add_option("--max-outer", params.max_outer);
  den->add_option("--max-inner", params.max_inner);
  den->add_option("--qp-tol", params.qp_tol);
  den->add_option("--report", report);

  auto* mem = app.add_subcommand("membrane", "membrane deflection via ADMM");
  mem->add_option("--config", config)->required();
  mem->add_option("--output", output)->required();
  mem->add_option("--report", report);

  auto* bench = app.add_subcommand("bench", "timing methodology run");
  bench->add_option("--pixels", pixels);
  bench->add_option("--repeats", repeats);
  bench->add_option("--output", output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (prox_eval->parsed()) return run_prox_eval(input, output);
  if (stair->parsed()) return run_stair_plot(instance, xmin, xmax, samples, output);
  if (den->parsed()) return run_denoise(input, output, params, report);
  if (mem->parsed()) return run_membrane(config, output, report);
  if (bench->parsed()) return run_bench(pixels, repeats, output);
  return kExitInput;
}
