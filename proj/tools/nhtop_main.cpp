// Command-line front end: point evaluations, sweeps, figure data
// regeneration and the numerical self-check suite.

#include "CLI11.hpp"
#include "nhtop/sweep.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

namespace {

using namespace nhtop;

constexpr int kExitInvalidConfig = 2;
constexpr int kExitNumericalFailure = 3;

struct CommonOpts {
  std::string model = "nh2";
  std::string embedding;
  double gamma = 1.0;
  double temperature = 0.5;
  double radius = 2.0;
  double loop_radius = 2.0;
  double displacement = 2.5;
  int windings = 2;
  std::vector<int> grid;
  std::string convention;
  std::string out;
  int threads = 1;
  std::string config_file;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--model", o.model, "model family: nh2|nh3|nh4|hermitian3");
  cmd->add_option("--embedding", o.embedding, "loop2d|sphere2d|s3|loop4d|s4");
  cmd->add_option("--gamma", o.gamma, "gain/loss rate (energy unit)");
  cmd->add_option("--temperature", o.temperature, "temperature in units of gamma");
  cmd->add_option("--radius", o.radius, "sphere/hypersphere radius R (units of gamma)");
  cmd->add_option("--loop-radius", o.loop_radius, "loop radius r (units of gamma)");
  cmd->add_option("--displacement", o.displacement, "loop center displacement d");
  cmd->add_option("--windings", o.windings, "loop traversals (1 or 2)");
  cmd->add_option("--grid", o.grid, "per-direction quadrature sample counts");
  cmd->add_option("--weight-convention", o.convention, "re|abs");
  cmd->add_option("--out", o.out, "output path");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--config", o.config_file, "JSON config file (sweep)");
}

ModelSpec spec_from(const CommonOpts& o, Embedding fallback) {
  ModelSpec m;
  m.family = family_from_string(o.model);
  m.embedding = o.embedding.empty() ? fallback : embedding_from_string(o.embedding);
  m.gamma = o.gamma;
  m.r = o.loop_radius;
  m.d = o.displacement;
  m.R = o.radius;
  m.validate();
  return m;
}

QuadratureGrid grid_from(const CommonOpts& o, Embedding e) {
  QuadratureGrid g = default_grid(e);
  if (!o.grid.empty()) g.dims = o.grid;
  return g;
}

void emit(const CommonOpts& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(o.out, std::ios::binary);
  os << text;
}

int run_check(const CommonOpts& o);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-state topological invariants of non-Hermitian models"};
  app.require_subcommand(1);

  CommonOpts o;
  auto* phase = app.add_subcommand("phase", "Uhlmann phase along the model loop");
  auto* chern = app.add_subcommand("chern", "first thermal/NT Chern numbers on the sphere");
  auto* dd = app.add_subcommand("dd", "Dixmier-Douady invariant on the parameter S3");
  auto* chern2 = app.add_subcommand("chern2", "second thermal/NT Chern numbers on S4");
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from flags or --config");
  auto* figure = app.add_subcommand("figure", "regenerate canonical figure data");
  auto* check = app.add_subcommand("check", "algebra and cross-check suites");
  for (CLI::App* c : {phase, chern, dd, chern2, sweep, figure, check}) add_common(c, o);

  bool naive = false;
  phase->add_flag("--naive-exponential", naive, "exp(sum A dtheta) instead of ordered product");
  bool weighted = true, nt = false;
  dd->add_flag("--nt", nt, "unweighted (non-topological) variant");
  chern2->add_flag("--nt", nt, "unweighted (non-topological) variant");
  bool eps_sum = false;
  chern2->add_flag("--full-eps-sum", eps_sum, "full antisymmetrized curvature contraction");

  std::string fig_id, sweep_inv = "uhlmann_phase", sweep_axis = "T";
  double sw_start = 0.1, sw_stop = 3.0, sw_step = 0.05;
  figure->add_option("id", fig_id, "fig1..fig6|figDD")->required();
  sweep->add_option("--invariant", sweep_inv, "invariant to sweep");
  sweep->add_option("--axis", sweep_axis, "sweep axis: T|d|R");
  sweep->add_option("--start", sw_start, "axis start");
  sweep->add_option("--stop", sw_stop, "axis stop");
  sweep->add_option("--step", sw_step, "axis step");

  CLI11_PARSE(app, argc, argv);
  set_worker_threads(o.threads);

  try {
    if (o.convention.empty()) o.convention = dd->parsed() ? "re" : "abs";
    const WeightConvention conv = weight_convention_from_string(o.convention);
    if (phase->parsed()) {
      const ModelSpec m = spec_from(
          o, family_from_string(o.model) == Family::NH4 ? Embedding::Loop4D : Embedding::Loop2D);
      const Holonomy h = uhlmann_phase(m, o.windings, o.temperature, 800, conv, naive);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "phase %.12g\nunwrapped %.12g\n", h.phase,
                    h.unwrapped_phase);
      emit(o, buf);
    } else if (chern->parsed()) {
      const ModelSpec m = spec_from(o, Embedding::Sphere2D);
      const QuadratureGrid g = grid_from(o, Embedding::Sphere2D);
      const InvariantResult cu = thermal_chern_2d(m, o.temperature, g, conv);
      const InvariantResult cunt = nt_chern_2d(m, o.temperature, g, conv);
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "C_U %.12g (refine %.3g, excluded %ld)\nC_U_nt %.12g (refine %.3g)\n",
                    cu.value, cu.refinement_delta, cu.excluded_points, cunt.value,
                    cunt.refinement_delta);
      emit(o, buf);
    } else if (dd->parsed()) {
      const ModelSpec m = spec_from(o, Embedding::S3);
      const QuadratureGrid g = grid_from(o, Embedding::S3);
      const InvariantResult r = dd_invariant(m, o.temperature, g, !nt, conv);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "DD%s %.12g (refine %.3g, excluded %ld)\n",
                    nt ? "_nt" : "_B", r.value, r.refinement_delta, r.excluded_points);
      emit(o, buf);
    } else if (chern2->parsed()) {
      const ModelSpec m = spec_from(o, Embedding::S4);
      const QuadratureGrid g = grid_from(o, Embedding::S4);
      const InvariantResult r = second_chern(m, o.temperature, g, !nt, conv, eps_sum);
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    "C_U2%s %.12g (refine %.3g, cross-check %.3g, excluded %ld)\n",
                    nt ? "_nt" : "", r.value, r.refinement_delta, r.cross_check_delta,
                    r.excluded_points);
      emit(o, buf);
    } else if (sweep->parsed()) {
      SweepConfig c;
      if (!o.config_file.empty()) {
        std::ifstream is(o.config_file);
        if (!is) throw InvalidConfig("cannot read config file " + o.config_file);
        std::string text((std::istreambuf_iterator<char>(is)),
                         std::istreambuf_iterator<char>());
        c = parse_config(text);
      } else {
        c.invariant = invariant_from_string(sweep_inv);
        Embedding fallback = Embedding::Loop2D;
        if (c.invariant == InvariantKind::Chern1 || c.invariant == InvariantKind::Chern1NT)
          fallback = Embedding::Sphere2D;
        if (c.invariant == InvariantKind::DD || c.invariant == InvariantKind::DDNT)
          fallback = Embedding::S3;
        if (c.invariant == InvariantKind::Chern2 || c.invariant == InvariantKind::Chern2NT)
          fallback = Embedding::S4;
        if (c.invariant == InvariantKind::UhlmannPhase &&
            family_from_string(o.model) == Family::NH4)
          fallback = Embedding::Loop4D;
        c.model = spec_from(o, fallback);
        c.axis = axis_from_string(sweep_axis);
        c.start = sw_start;
        c.stop = sw_stop;
        c.step = sw_step;
        c.temperature = o.temperature;
        c.grid = grid_from(o, c.model.embedding);
        c.windings = o.windings;
        c.convention = conv;
        c.out = o.out;
      }
      const std::vector<SweepRecord> recs = run_sweep(c);
      bool all_failed = !recs.empty();
      for (const SweepRecord& r : recs)
        if (r.error.empty()) all_failed = false;
      emit(o, render_csv(recs, true));
      if (all_failed) return kExitNumericalFailure;
    } else if (figure->parsed()) {
      const std::string dir = o.out.empty() ? "figures" : o.out;
      const FigureOutput files = emit_figure(figure_from_string(fig_id), dir);
      for (const std::string& f : files.files) std::cout << f << "\n";
    } else if (check->parsed()) {
      return run_check(o);
    }
  } catch (const InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const IncompatibleEmbedding& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  return 0;
}

namespace {

int run_check(const CommonOpts& o) {
  int failures = 0;
  auto report = [&](const char* name, bool ok, double residual) {
    std::printf("%-42s %s  (%.3g)\n", name, ok ? "ok" : "FAIL", residual);
    if (!ok) ++failures;
  };

  // algebra identities
  {
    const auto s = pauli_basis();
    double worst = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const Matrix anti = s[a] * s[b] + s[b] * s[a];
        const Matrix expect = 2.0 * (a == b ? 1.0 : 0.0) * Matrix::Identity(2, 2);
        worst = std::max(worst, max_abs(Matrix(anti - expect)));
      }
    report("pauli anticommutators", worst < 1e-12, worst);
  }
  {
    const auto G = dirac_basis();
    double worst = 0.0;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        const Matrix anti = G[a] * G[b] + G[b] * G[a];
        const Matrix expect = 2.0 * (a == b ? 1.0 : 0.0) * Matrix::Identity(4, 4);
        worst = std::max(worst, max_abs(Matrix(anti - expect)));
      }
    report("clifford anticommutators", worst < 1e-12, worst);
  }

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ang(0.3, M_PI - 0.3);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
  const WeightConvention conv = weight_convention_from_string(o.convention);

  // biorthogonality + sqrt residuals on random thermal states
  {
    double worst_bi = 0.0, worst_sq = 0.0;
    for (int k = 0; k < 40; ++k) {
      const ModelSpec m = make_spec(Family::NH2, Embedding::Sphere2D, o.gamma, 2.0, 2.5,
                                    0.4 + 2.4 * (k % 10) / 10.0);
      const ParamPoint p{ang(rng), ph(rng)};
      const EigenSystem es = model_eigensystem(m, p);
      worst_bi = std::max(worst_bi, es.biorthonormality_residual());
      const ThermalState ts = density_matrix(es, o.temperature, conv);
      const Matrix sq = matrix_sqrt_biortho(ts.weights, es);
      worst_sq = std::max(worst_sq, max_abs(Matrix(sq * sq - ts.rho)));
    }
    report("biorthonormality (random points)", worst_bi < 1e-10, worst_bi);
    report("sqrt(rho)^2 = rho (random states)", worst_sq < 1e-10, worst_sq);
  }

  // generic vs closed-form connections
  {
    double worst = 0.0;
    const ModelSpec m = make_spec(Family::NH2, Embedding::Sphere2D);
    for (int k = 0; k < 20; ++k) {
      const ParamPoint p{ang(rng), ph(rng)};
      for (int dir = 0; dir < 2; ++dir) {
        const Matrix a = connection_generic_at(m, p, dir, o.temperature, 1e-5, conv);
        const Matrix b = connection_closed_2d(m, p, dir, o.temperature, conv);
        worst = std::max(worst, max_abs(Matrix(a - b)));
      }
    }
    report("generic vs closed 2d connection", worst < 1e-5, worst);
  }
  {
    double worst = 0.0;
    const ModelSpec m = make_spec(Family::NH4, Embedding::S4);
    std::uniform_real_distribution<double> t2(0.2, M_PI / 2 - 0.2);
    for (int k = 0; k < 8; ++k) {
      const ParamPoint p{ang(rng), t2(rng), ph(rng), ph(rng)};
      const auto closed = connection_components_4d(m, p, o.temperature, conv);
      for (int dir = 0; dir < 4; ++dir) {
        const Matrix gen = connection_generic_at(m, p, dir, o.temperature, 1e-5, conv);
        worst = std::max(worst, max_abs(Matrix(closed[dir] - gen)));
      }
    }
    report("generic vs closed 4d components", worst < 1e-5, worst);
  }
  {
    const ModelSpec m = make_spec(Family::NH4, Embedding::S4);
    const ParamPoint p{1.1, 0.7, 0.9, 1.7};
    const TraceCheckReport rep = trace_component_checks(m, p, o.temperature, conv);
    report("curvature trace coefficient pattern", rep.max_relative_residual < 1e-4,
           rep.max_relative_residual);
  }

  return failures == 0 ? 0 : kExitNumericalFailure;
}

}  // namespace
