#include "tpflow/runner.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tpflow/cvfe_scheme.hpp"
#include "tpflow/ddfv_scheme.hpp"
#include "tpflow/mesh_io.hpp"
#include "tpflow/verify.hpp"

namespace tpf {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// all output files are written to a temp name and renamed into place
class TsvWriter {
 public:
  TsvWriter(const fs::path& path, const std::string& header) : path_(path), tmp_(path.string() + ".tmp") {
    out_.open(tmp_);
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "\t" : "") << cells[i];
    out_ << "\n";
  }
  void close() {
    out_.close();
    fs::rename(tmp_, path_);
  }

 private:
  fs::path path_, tmp_;
  std::ofstream out_;
};

PolygonMesh build_soup(const CaseConfig& cfg) {
  if (!cfg.mesh_file.empty()) return read_polygon_mesh(cfg.mesh_file);
  if (cfg.backend == "ddfv")
    return structured_quads(cfg.nx, cfg.ny, cfg.distortion, cfg.dirichlet_sides, cfg.mesh_seed);
  return structured_triangles(cfg.nx, cfg.ny, cfg.split, cfg.dirichlet_sides);
}

void write_fields(const SchemeBackend& backend, const State& s, const fs::path& path) {
  TsvWriter w(path, "node\tdof\tx[m]\ty[m]\tp_g[Pa]\tp_w[Pa]\ts_g[-]");
  for (int i = 0; i < backend.n_node(); ++i) {
    Vec2 x = backend.node_position(i);
    w.row({std::to_string(i), std::to_string(backend.node_unknown(i)), fmt(x.x()), fmt(x.y()),
           fmt(s.p_g[i]), fmt(s.p_w[i]), fmt(s.s_g[i])});
  }
  w.close();
}

void write_trace(const std::vector<StepRecord>& steps, const fs::path& path) {
  TsvWriter w(path,
              "step\teps[-]\teta[-]\tnewton_iters\tresid_inf[kg]\tsat_min[-]\tsat_max[-]"
              "\tzeta_p[Pa]\tzeta_xi[Pa]\tpc_norm[Pa]\tpg_norm[Pa]\tpw_norm[Pa]"
              "\tstep_distance[Pa]\tinserted");
  for (const auto& rec : steps) {
    for (const auto& r : rec.result.trace.rungs) {
      w.row({std::to_string(rec.step), fmt(r.eps), fmt(r.eta), std::to_string(r.newton_iters),
             fmt(r.residual_inf), fmt(r.sat_min), fmt(r.sat_max), fmt(r.zeta.p), fmt(r.zeta.xi),
             fmt(r.zeta.pc), fmt(r.zeta.pg), fmt(r.zeta.pw), fmt(r.step_distance),
             r.inserted ? "1" : "0"});
    }
  }
  w.close();
}

}  // namespace

std::unique_ptr<SchemeBackend> make_backend(const CaseConfig& cfg) {
  FluidModel fluid(cfg.fluid);
  PolygonMesh soup = build_soup(cfg);
  if (cfg.backend == "ddfv") {
    return std::make_unique<DdfvBackend>(DdfvMesh::build(soup, cfg.medium), std::move(fluid));
  }
  return std::make_unique<CvfeBackend>(CvfeMesh::build(soup, cfg.medium), std::move(fluid));
}

State initial_state(const CaseConfig& cfg, const SchemeBackend& backend) {
  VecX p_g = VecX::Zero(backend.n_node()), p_w = VecX::Zero(backend.n_node());
  for (int i = 0; i < backend.n_node(); ++i) {
    Vec2 x = backend.node_position(i);
    if (cfg.profile == "uniform") {
      p_g[i] = cfg.pg;
      p_w[i] = cfg.pw;
    } else if (cfg.profile == "two-region") {
      bool left = x.x() <= cfg.xsplit;
      p_g[i] = left ? cfg.pg_left : cfg.pg_right;
      p_w[i] = left ? cfg.pw_left : cfg.pw_right;
    }
  }
  return backend.state_from_pressures(p_g, p_w);
}

int cmd_run(const CaseConfig& cfg_in, const CliOptions& opts) {
  CaseConfig cfg = cfg_in;
  if (!opts.backend.empty()) cfg.backend = opts.backend;
  if (opts.seed) cfg.seed = opts.seed;
  fs::path out_dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
  fs::create_directories(out_dir);

  auto backend = make_backend(cfg);
  State initial = initial_state(cfg, *backend);
  if (cfg.write_fields) write_fields(*backend, initial, out_dir / "step_0000.tsv");

  if (opts.dump_system) {
    // linearization of the first rung at the initial state, for debugging
    SchemeParams par{cfg.ladder.eps.front(), cfg.ladder.eta.front(), cfg.dt};
    VecX r;
    backend->residual(initial, initial, par, r);
    {
      TsvWriter w(out_dir / "residual.tsv", "row\tvalue[kg]");
      for (int i = 0; i < r.size(); ++i) w.row({std::to_string(i), fmt(r[i])});
      w.close();
    }
    SpMat jac = backend->jacobian(initial, initial, par);
    {
      TsvWriter w(out_dir / "jacobian.tsv", "row\tcol\tvalue[kg/Pa]");
      for (int c = 0; c < jac.outerSize(); ++c)
        for (SpMat::InnerIterator it(jac, c); it; ++it)
          w.row({std::to_string(it.row()), std::to_string(it.col()), fmt(it.value())});
      w.close();
    }
  }

  TimeLoopResult run = time_loop(*backend, initial, cfg.t_final, cfg.dt, cfg.ladder, cfg.newton);

  TsvWriter summary(out_dir / "run_summary.tsv",
                    "step\ttime[s]\trungs\tnewton_total\tresid_inf[kg]\tsat_min[-]\tsat_max[-]"
                    "\tgamma1[J]\tgamma2[J]\tgamma3[J]\tpairing[J]\tzeta_p[Pa]\tzeta_xi[Pa]"
                    "\tpc_norm[Pa]\tc_n[J]\tc_gamma1[-]");
  State prev = initial;
  for (const auto& rec : run.steps) {
    if (rec.result.status != SolveStatus::converged) break;
    const State& s = rec.result.state;
    if (cfg.write_fields) {
      char name[32];
      std::snprintf(name, sizeof(name), "step_%04d.tsv", rec.step);
      write_fields(*backend, s, out_dir / name);
    }
    int newton_total = 0;
    for (const auto& r : rec.result.trace.rungs) newton_total += r.newton_iters;
    SchemeParams par{0.0, 0.0, cfg.dt};
    EnergyReport er = energy_decomposition(*backend, s, prev, par);
    const Rung& last = rec.result.trace.rungs.back();
    summary.row({std::to_string(rec.step), fmt(rec.time), std::to_string(rec.result.trace.rungs.size()),
                 std::to_string(newton_total), fmt(last.residual_inf), fmt(er.sat_min),
                 fmt(er.sat_max), fmt(er.gamma1), fmt(er.gamma2), fmt(er.gamma3),
                 fmt(er.direct_pairing), fmt(er.zeta_p), fmt(er.zeta_xi), fmt(er.pc_norm),
                 fmt(er.c_n), fmt(er.c_gamma1)});
    prev = s;
  }
  summary.close();
  write_trace(run.steps, out_dir / "trace.tsv");

  if (run.status != SolveStatus::converged) {
    std::cerr << "run: continuation failed at step " << run.failed_step << ": "
              << run.steps.back().result.detail << "\n";
    return 1;
  }
  if (!opts.quiet)
    std::cout << "run: " << run.steps.size() << " steps converged; outputs in " << out_dir.string()
              << "\n";
  return 0;
}

namespace {

struct CheckRow {
  std::string name;
  bool gated = true;
  bool pass = false;
  double margin = 0.0;
  std::string note;
};

// random stacked unknown vector in [-range, range]
VecX random_unknowns(const SchemeBackend& backend, Rng& rng, double range) {
  VecX x(backend.n_dof());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-range, range);
  return x;
}

}  // namespace

int cmd_verify(const CaseConfig& cfg_in, const CliOptions& opts) {
  CaseConfig cfg = cfg_in;
  if (!opts.backend.empty()) cfg.backend = opts.backend;
  if (opts.seed) cfg.seed = opts.seed;
  fs::path out_dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
  fs::create_directories(out_dir);

  auto backend = make_backend(cfg);
  const FluidModel& fluid = backend->fluid();
  State initial = initial_state(cfg, *backend);
  std::vector<CheckRow> rows;

  // one implicit step through the whole ladder
  ContinuationResult cont = continuation_solve(*backend, initial, cfg.ladder, cfg.dt, cfg.newton);
  rows.push_back({"continuation", true, cont.status == SolveStatus::converged,
                  cont.trace.rungs.empty() ? 0.0 : cont.trace.rungs.back().residual_inf,
                  cont.detail});

  // (P.c): saturation bounds at every eps = 0 rung
  {
    bool pass = true;
    double worst = 0.0;
    for (const auto& r : cont.trace.rungs) {
      if (r.eps != 0.0) continue;
      double v = std::max(-r.sat_min, r.sat_max - 1.0);
      worst = std::max(worst, v);
      if (v > 1e-12) pass = false;
    }
    rows.push_back({"max_principle", true, pass, worst, "eps=0 rungs"});
  }

  // solves at pinned (eps, eta) pairs for the energy identities
  struct Pinned {
    double eps, eta;
    State state;
    bool ok;
  };
  std::vector<Pinned> pins;
  for (auto [eps, eta] : std::vector<std::pair<double, double>>{
           {1e-2, cfg.ladder.eta.front()}, {1e-4, cfg.ladder.eta.front()}, {0.0, 1e-2}, {0.0, 1e-4}}) {
    NewtonResult nr = newton_solve(*backend, cont.state, initial, eps, eta, cfg.dt, cfg.newton);
    pins.push_back({eps, eta, nr.state, nr.status == SolveStatus::converged});
  }

  {
    bool pass = true;
    double worst = 0.0;
    for (const auto& p : pins) {
      if (!p.ok) {
        pass = false;
        continue;
      }
      SchemeParams par{p.eps, p.eta, cfg.dt};
      EnergyReport er = energy_decomposition(*backend, p.state, initial, par);
      double err = std::abs(er.sum() - er.direct_pairing) / (1.0 + std::abs(er.direct_pairing));
      worst = std::max(worst, err);
      if (!er.sum_identity_holds()) pass = false;
    }
    rows.push_back({"energy_identity", true, pass, worst, "gamma1+2+3 vs <F,g>"});
  }

  {
    bool pass = true;
    double worst = 0.0;
    for (const auto& p : pins) {
      if (!p.ok || p.eta <= 0.0) continue;
      SchemeParams par{p.eps, p.eta, cfg.dt};
      EnergyTerms terms = backend->energy_terms(p.state, initial, par);
      double ref = p.eta * cfg.dt * backend->eta_quadratic(p.state);
      double err = std::abs(terms.gamma3 - ref) / std::max(1.0, std::abs(ref));
      worst = std::max(worst, err);
      if (err > 1e-10) pass = false;
    }
    rows.push_back({"gamma3_identity", true, pass, worst, "eta-capillary pairing"});
  }

  {
    bool applicable = backend->cross_free();
    bool pass = true;
    double worst = 0.0;
    if (applicable) {
      for (const auto& p : pins) {
        if (!p.ok || p.eps <= 0.0) continue;
        SchemeParams par{p.eps, p.eta, cfg.dt};
        EnergyTerms terms = backend->energy_terms(p.state, initial, par);
        double ref = cfg.dt * backend->gamma2_explicit(p.state, p.eps);
        double err = std::abs(terms.gamma2 - ref) / std::max(1.0, std::abs(ref));
        worst = std::max(worst, err);
        if (err > 1e-10) pass = false;
        double lower = cfg.dt * p.eps *
                       (backend->pressure_quadratic(p.state.p_g) +
                        backend->pressure_quadratic(p.state.p_w));
        if (terms.gamma2 < lower - 1e-12 * std::max(1.0, std::abs(lower))) pass = false;
      }
    }
    rows.push_back({"gamma2_identity", applicable, pass, worst,
                    applicable ? "cross-free mesh" : "skipped: mesh has cross terms"});
  }

  {
    // (P.b): bit-identical base assembly at eps = eta = 0
    Rng rng(cfg.seed);
    bool pass = true;
    VecX r_reg, r_base;
    for (int k = 0; k < 50; ++k) {
      State s = backend->make_state(random_unknowns(*backend, rng, cfg.pressure_range));
      backend->residual(s, initial, SchemeParams{0.0, 0.0, cfg.dt}, r_reg);
      backend->residual_base(s, initial, cfg.dt, r_base);
      for (int i = 0; i < r_reg.size(); ++i)
        if (std::memcmp(&r_reg[i], &r_base[i], sizeof(double)) != 0) pass = false;
    }
    rows.push_back({"reg_consistency_pb", true, pass, 0.0, "bit-for-bit at (0,0)"});
  }

  {
    // (P.a): finite continuity modulus over random states
    Rng rng(cfg.seed + 1);
    double kmax = 0.0;
    VecX r0, r1;
    for (int k = 0; k < 100; ++k) {
      State s = backend->make_state(random_unknowns(*backend, rng, cfg.pressure_range));
      backend->residual(s, initial, SchemeParams{0.0, 0.0, cfg.dt}, r0);
      for (auto [eps, eta] : std::vector<std::pair<double, double>>{
               {1e-2, 0.0}, {0.0, 1e-2}, {1e-3, 1e-3}}) {
        backend->residual(s, initial, SchemeParams{eps, eta, cfg.dt}, r1);
        kmax = std::max(kmax, (r1 - r0).lpNorm<Eigen::Infinity>() / (eps + eta));
      }
    }
    rows.push_back({"reg_continuity_pa", true, std::isfinite(kmax), kmax, "K estimate"});
  }

  {
    Lem1Report rep = check_lem1(fluid, cfg.samples, cfg.seed, cfg.pressure_range);
    rows.push_back({"lem1", true, rep.pass, rep.worst_margin,
                    "violations=" + std::to_string(rep.violations)});
  }
  {
    CorrectiveBoundsReport rep = check_corrective_bounds(fluid, cfg.samples, cfg.seed + 2);
    rows.push_back({"corrective_bounds", true, rep.pass, rep.worst_margin, ""});
  }
  {
    MonitorReport rep = continuation_monitors(cont.trace);
    rows.push_back({"monitors_finite", true, rep.finite, std::max(rep.pd_max, rep.pe_max),
                    "P.d=" + fmt(rep.pd_max) + " P.e=" + fmt(rep.pe_max)});
  }

  // CVFE coverage: the min-saturation upwind branch must fire iff the mesh has
  // negative stiffness coefficients
  if (cfg.backend == "cvfe") {
    const auto* cvfe = dynamic_cast<const CvfeBackend*>(backend.get());
    long count = cvfe->upwind_min_branch_count();
    bool has_negative = !cvfe->mesh().all_coefs_nonnegative();
    bool pass = has_negative ? count > 0 : count == 0;
    rows.push_back({"upwind_coverage", true, pass, static_cast<double>(count),
                    has_negative ? "negative coefficients present" : "all coefficients nonnegative"});
  }

  // non-gated diagnostics
  {
    SchemeParams par{0.0, 0.0, cfg.dt};
    EnergyReport er = energy_decomposition(*backend, cont.state, initial, par);
    rows.push_back({"diag_c_n", false, true, er.c_n, "accumulation constant"});
    rows.push_back({"diag_c_gamma1", false, true, er.c_gamma1, "norm-inequality constant"});
    for (const auto& p : pins) {
      if (!p.ok || p.eps <= 0.0 || backend->cross_free()) continue;
      SchemeParams pp{p.eps, p.eta, cfg.dt};
      EnergyTerms terms = backend->energy_terms(p.state, initial, pp);
      double quad = cfg.dt * backend->gamma2_explicit(p.state, p.eps);
      if (quad > 0.0)
        rows.push_back({"diag_nu_empirical", false, true, terms.gamma2 / quad,
                        "eps=" + fmt(p.eps)});
    }
    double nu = 1.0;
    rows.push_back({"diag_existence_radius", false, true,
                    existence_radius(er.c_n, er.c_gamma1, 1e-2, cfg.ladder.eta.front(), cfg.dt, nu),
                    "eps=1e-2, nu=1"});
  }

  TsvWriter report(out_dir / "verify_report.tsv", "check\tgated\tpass\tmargin[-]\tnote");
  bool all_pass = true;
  for (const auto& r : rows) {
    report.row({r.name, r.gated ? "1" : "0", r.pass ? "1" : "0", fmt(r.margin), r.note});
    if (r.gated && !r.pass) all_pass = false;
    if (!opts.quiet)
      std::cout << (r.pass ? "[pass] " : (r.gated ? "[FAIL] " : "[info] ")) << r.name
                << "  margin=" << r.margin << (r.note.empty() ? "" : "  (" + r.note + ")") << "\n";
  }
  report.close();
  if (!all_pass) {
    std::cerr << "verify: failing checks:";
    for (const auto& r : rows)
      if (r.gated && !r.pass) std::cerr << " " << r.name;
    std::cerr << "\n";
    return 1;
  }
  return 0;
}

int cmd_sweep(const CaseConfig& cfg_in, const std::string& parameter,
              const std::vector<double>& values, const CliOptions& opts) {
  CaseConfig cfg = cfg_in;
  if (!opts.backend.empty()) cfg.backend = opts.backend;
  if (values.empty()) throw ConfigError("sweep needs a nonempty values list");
  if (parameter != "eps" && parameter != "eta" && parameter != "dt")
    throw ConfigError("sweep parameter must be eps, eta or dt");
  fs::path out_dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
  fs::create_directories(out_dir);

  auto backend = make_backend(cfg);
  State initial = initial_state(cfg, *backend);
  TsvWriter table(out_dir / "sweep.tsv",
                  "param\tvalue[-]\tstatus\tresid_inf[kg]\tsat_min[-]\tsat_max[-]"
                  "\tzeta_p[Pa]\tzeta_xi[Pa]\tpc_norm[Pa]");
  State warm = initial;
  int failures = 0;
  for (double v : values) {
    SolveStatus status;
    State solved;
    double resid = 0.0;
    if (parameter == "dt") {
      ContinuationResult cr = continuation_solve(*backend, initial, cfg.ladder, v, cfg.newton);
      status = cr.status;
      solved = cr.state;
      if (!cr.trace.rungs.empty()) resid = cr.trace.rungs.back().residual_inf;
    } else {
      double eps = parameter == "eps" ? v : 0.0;
      double eta = parameter == "eta" ? v : cfg.ladder.eta.front();
      if (parameter == "eta") eta = v;
      NewtonResult nr = newton_solve(*backend, warm, initial, eps, eta, cfg.dt, cfg.newton);
      status = nr.status;
      solved = nr.state;
      resid = nr.residual_inf;
    }
    bool ok = status == SolveStatus::converged;
    if (ok) warm = solved;
    if (!ok) ++failures;
    auto [lo, hi] = backend->saturation_range(ok ? solved : warm);
    ZetaNorms z = backend->zeta_norms(ok ? solved : warm);
    table.row({parameter, fmt(v), to_string(status), fmt(resid), fmt(lo), fmt(hi), fmt(z.p),
               fmt(z.xi), fmt(z.pc)});
  }
  table.close();
  if (!opts.quiet)
    std::cout << "sweep: " << values.size() - failures << "/" << values.size()
              << " rows converged; table in " << (out_dir / "sweep.tsv").string() << "\n";
  return 0;
}

int cmd_mesh_gen(const CaseConfig& cfg_in, const CliOptions& opts) {
  CaseConfig cfg = cfg_in;
  if (!opts.backend.empty()) cfg.backend = opts.backend;
  fs::path out_dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
  fs::create_directories(out_dir);
  PolygonMesh soup = build_soup(cfg);
  // validate by building the full structure before writing
  make_backend(cfg);
  fs::path path = out_dir / "mesh.txt";
  write_polygon_mesh(soup, path.string());
  if (!opts.quiet)
    std::cout << "mesh-gen: " << soup.cells.size() << " cells, " << soup.vertices.size()
              << " vertices -> " << path.string() << "\n";
  return 0;
}

int cmd_mesh_stats(const CaseConfig& cfg_in, const CliOptions& opts) {
  CaseConfig cfg = cfg_in;
  if (!opts.backend.empty()) cfg.backend = opts.backend;
  fs::path out_dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
  fs::create_directories(out_dir);
  auto backend = make_backend(cfg);
  std::ostringstream ss;
  if (cfg.backend == "ddfv") {
    const auto& mesh = dynamic_cast<const DdfvBackend*>(backend.get())->mesh();
    DdfvMeshStats s = mesh.stats();
    ss << "backend = ddfv\n"
       << "primal_cells = " << s.n_primal << "\n"
       << "boundary_edge_cells = " << s.n_bedge << "\n"
       << "dual_cells = " << s.n_vertex << "\n"
       << "unknowns_per_phase = " << s.n_unknown << "\n"
       << "diamonds = " << s.n_diamond << "\n"
       << "dirichlet_edge_cells = " << s.n_dirichlet_bedge << "\n"
       << "neumann_edge_cells = " << s.n_neumann_bedge << "\n"
       << "dirichlet_vertices = " << s.n_dirichlet_vertex << "\n"
       << "mixed_corner_vertices_flagged_dirichlet = " << s.n_mixed_corner_vertices << "\n"
       << "primal_area = " << fmt(s.primal_area) << "\n"
       << "dual_area = " << fmt(s.dual_area) << "\n"
       << "diamond_area = " << fmt(s.diamond_area) << "\n"
       << "alpha_min_rad = " << fmt(s.alpha_min) << "\n"
       << "alpha_max_rad = " << fmt(s.alpha_max) << "\n"
       << "tau_min = " << fmt(s.tau_min) << "\n"
       << "tau_max = " << fmt(s.tau_max) << "\n"
       << "eta_abs_max = " << fmt(s.eta_abs_max) << "\n";
  } else {
    const auto& mesh = dynamic_cast<const CvfeBackend*>(backend.get())->mesh();
    CvfeMeshStats s = mesh.stats();
    ss << "backend = cvfe\n"
       << "vertices = " << s.n_vertex << "\n"
       << "triangles = " << s.n_triangle << "\n"
       << "unknowns_per_phase = " << s.n_unknown << "\n"
       << "dirichlet_vertices = " << s.n_dirichlet << "\n"
       << "area = " << fmt(s.area) << "\n"
       << "dual_area = " << fmt(s.dual_area) << "\n"
       << "stiffness_coef_min = " << fmt(s.coef_min) << "\n"
       << "stiffness_coef_max = " << fmt(s.coef_max) << "\n"
       << "negative_coefs = " << s.n_negative_coefs << "\n";
  }
  fs::path path = out_dir / "mesh_stats.txt";
  {
    std::ofstream out(path.string() + ".tmp");
    out << ss.str();
  }
  fs::rename(path.string() + ".tmp", path);
  if (!opts.quiet) std::cout << ss.str();
  return 0;
}

}  // namespace tpf
