#include "picproj/bench.hpp"

#include "picproj/advection.hpp"
#include "picproj/fespace.hpp"
#include "picproj/mesh.hpp"
#include "picproj/particles.hpp"
#include "picproj/projection.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace picproj {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

enum class Method { kL2, kBoundedL2, kPde };

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Run {
  ParticleSet* set;
  int slot;
  const DgSpace* space;
  const MultiplierSpace* multiplier = nullptr;
  const TraceSpace* trace = nullptr;
  Method method;
  Method initial_method;
  AdvectionConfig advection;
  PdeParameters pde;
  std::function<double(const Vec2&, double)> exact;
  int steps;
  int threads;
  bool timings;
};

DgField fit(const Run& run, Method method) {
  if (method == Method::kBoundedL2) return l2_project_bounded(*run.set, run.slot, *run.space, 0.0, 1.0, run.threads);
  return l2_project(*run.set, run.slot, *run.space, run.threads);
}

ReportRow make_row(const Run& run, int step, double t, const DgField& psi, const DgField& psi0) {
  ReportRow row;
  row.step = step;
  row.time = t;
  row.l2_error = l2_error(psi, [&](const Vec2& x) { return run.exact(x, t); });
  row.mass_error = mass_error(psi, psi0);
  std::tie(row.psi_min, row.psi_max) = sample_extrema(psi);
  row.n_particles = run.set->size();
  return row;
}

BenchmarkReport run_loop(const Run& run) {
  BenchmarkReport report;
  report.cells = run.space->mesh().num_cells();

  auto start = Clock::now();
  const DgField psi0 = fit(run, run.initial_method);
  ReportRow first = make_row(run, 0, 0.0, psi0, psi0);
  if (run.timings) first.t_solve_s = elapsed(start);
  report.rows.push_back(first);
  report.mass_scale = integrate_abs(psi0);

  std::optional<PdeProjection> pde;
  if (run.method == Method::kPde) pde.emplace(*run.space, *run.multiplier, *run.trace);

  DgField psi = psi0;
  for (int step = 1; step <= run.steps; ++step) {
    const double t_old = (step - 1) * run.advection.dt;
    const double t_new = step * run.advection.dt;
    ReportRow timing;

    start = Clock::now();
    do_step(*run.set, run.advection, t_old);
    timing.t_advect_s = elapsed(start);

    if (run.method == Method::kPde) {
      start = Clock::now();
      const CondensedSystem system =
          pde->assemble(*run.set, run.slot, run.advection.velocity, t_new, run.pde, psi, run.threads);
      timing.t_assemble_s = elapsed(start);
      start = Clock::now();
      PdeSolution sol = pde->solve(system, TraceSolver::kLdlt, run.threads);
      timing.t_solve_s = elapsed(start);
      const VectorX balance = pde->local_balance(system, sol, psi, run.pde);
      report.max_local_imbalance = std::max(report.max_local_imbalance, balance.cwiseAbs().maxCoeff());
      psi = std::move(sol.psi);
    } else {
      start = Clock::now();
      psi = fit(run, run.method);
      timing.t_solve_s = elapsed(start);
    }

    ReportRow row = make_row(run, step, t_new, psi, psi0);
    if (run.timings) {
      row.t_advect_s = timing.t_advect_s;
      row.t_assemble_s = timing.t_assemble_s;
      row.t_solve_s = timing.t_solve_s;
    }
    report.rows.push_back(row);
  }
  report.metadata["cells"] = std::to_string(report.cells);
  report.metadata["mass_scale"] = fmt(report.mass_scale);
  if (run.method == Method::kPde) report.metadata["max_local_imbalance"] = fmt(report.max_local_imbalance);
  return report;
}

}  // namespace

double slotted_disk_indicator(double x, double y) {
  constexpr double xc = -0.15;
  constexpr double yc = 0.0;
  constexpr double radius = 0.2;
  constexpr double half_width = 0.05;
  const double dx = x - xc;
  const double dy = y - yc;
  if (dx * dx + dy * dy > radius * radius) return 0.0;
  // slot of width 0.1 cut 0.2 deep from the top of the disk
  if (std::abs(dx) <= half_width && dy >= radius - 0.2) return 0.0;
  return 1.0;
}

BenchmarkReport run_pulse(const PulseConfig& config) {
  if (config.k < 0 || config.k > 6) throw InvalidArgument("k must be in 0..6");
  if (config.n < 1) throw InvalidArgument("n must be positive");
  if (!(config.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (config.projection != "l2" && config.projection != "pde") throw InvalidArgument("projection must be l2 or pde");
  if (config.seeding != "lattice" && config.seeding != "random") throw InvalidArgument("seeding must be lattice or random");
  if (!(config.ppc > 0.0)) throw InvalidArgument("ppc must be positive");
  const int steps = config.steps >= 0 ? config.steps : static_cast<int>(std::lround(1.0 / config.dt));

  SimplicialMesh mesh = build_rectangle_mesh(config.n, config.n);
  mesh.set_boundary_markers([](const Vec2&) { return marker::kPeriodic; });
  const PeriodicLimits limits[] = {{0, 0.0, 1.0}, {1, 0.0, 1.0}};
  mesh.pair_periodic(limits);

  const DgSpace space(mesh, config.k);
  const MultiplierSpace multiplier(mesh, 0);
  const TraceSpace trace(mesh, config.k);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto exact = [](const Vec2& x, double t) {
    return std::sin(two_pi * (x.x() - t)) * std::sin(two_pi * (x.y() - t));
  };

  std::vector<Vec2> positions;
  if (config.seeding == "lattice") {
    const auto per_axis = static_cast<Index>(std::lround(std::sqrt(config.ppc * static_cast<double>(mesh.num_cells()))));
    positions = generate_lattice(Rectangle{}, per_axis, per_axis);
  } else {
    positions = generate_random_cell(mesh, static_cast<Index>(std::lround(config.ppc)), config.seed);
  }
  std::vector<double> values(positions.size());
  if (config.analytic_init) {
    for (std::size_t i = 0; i < positions.size(); ++i) values[i] = exact(positions[i], 0.0);
  } else {
    const DgField nodal = interpolate(space, [&](const Vec2& x) { return exact(x, 0.0); });
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const Index c = mesh.locate_point(positions[i]);
      values[i] = nodal.cell_coefficients(c).dot(space.values_at(c, positions[i]));
    }
  }
  auto created = create_particles(mesh, positions, {{"psi", 1}}, {values});

  Run run{&created.set, 1, &space, &multiplier, &trace,
          config.projection == "pde" ? Method::kPde : Method::kL2, Method::kL2,
          AdvectionConfig{Scheme::kEuler, config.dt, [](const Vec2&, double) { return Vec2(1.0, 1.0); }, 0,
                          config.threads},
          PdeParameters{config.dt, config.theta, config.beta, config.zeta}, exact, steps, config.threads,
          config.record_timings};
  BenchmarkReport report = run_loop(run);
  auto& m = report.metadata;
  m["benchmark"] = "pulse";
  m["k"] = std::to_string(config.k);
  m["n"] = std::to_string(config.n);
  m["dt"] = fmt(config.dt);
  m["steps"] = std::to_string(steps);
  m["projection"] = config.projection;
  m["beta"] = fmt(config.beta);
  m["zeta"] = fmt(config.zeta);
  m["theta"] = fmt(config.theta);
  m["l"] = "0";
  m["seeding"] = config.seeding;
  m["ppc"] = fmt(config.ppc);
  m["seed"] = std::to_string(config.seed);
  m["threads"] = std::to_string(config.threads);
  m["scheme"] = "euler";
  m["init"] = config.analytic_init ? "analytic" : "interpolant";
  m["initial_particles"] = std::to_string(report.rows.front().n_particles);
  return report;
}

BenchmarkReport run_slotted_disk(const SlottedDiskConfig& config) {
  if (config.test_case < 1 || config.test_case > 3) throw InvalidArgument("case must be 1, 2 or 3");
  if (config.ppc < 1) throw InvalidArgument("ppc must be positive");
  if (config.rotations < 0 || config.steps_per_rotation < 1) throw InvalidArgument("invalid rotation count");
  const double radius = std::sqrt(0.5);
  const SimplicialMesh mesh = build_disk_mesh(radius, config.h);

  const DgSpace space(mesh, 1);
  const MultiplierSpace multiplier(mesh, 0);
  const TraceSpace trace(mesh, 1);

  constexpr double pi = std::numbers::pi;
  auto exact = [](const Vec2& x, double t) {
    const double c = std::cos(pi * t);
    const double s = std::sin(pi * t);
    return slotted_disk_indicator(c * x.x() + s * x.y(), -s * x.x() + c * x.y());
  };

  const std::vector<Vec2> positions = generate_random_cell(mesh, config.ppc, config.seed);
  std::vector<double> values(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) values[i] = slotted_disk_indicator(positions[i].x(), positions[i].y());
  auto created = create_particles(mesh, positions, {{"psi", 1}}, {values});

  const double dt = 2.0 / config.steps_per_rotation;
  const double zeta = config.test_case == 3 ? 30.0 : 0.0;
  Run run{&created.set, 1, &space, &multiplier, &trace,
          config.test_case == 1 ? Method::kBoundedL2 : Method::kPde, Method::kBoundedL2,
          AdvectionConfig{Scheme::kRk3, dt, [](const Vec2& x, double) { return Vec2(-pi * x.y(), pi * x.x()); }, 0,
                          config.threads},
          PdeParameters{dt, 0.5, 1e-6, zeta}, exact, config.rotations * config.steps_per_rotation, config.threads,
          config.record_timings};
  BenchmarkReport report = run_loop(run);
  auto& m = report.metadata;
  m["benchmark"] = "slotted-disk";
  m["case"] = std::to_string(config.test_case);
  m["projection"] = config.test_case == 1 ? "bounded-l2" : "pde";
  m["k"] = "1";
  m["l"] = "0";
  m["zeta"] = fmt(zeta);
  m["beta"] = fmt(1e-6);
  m["h"] = fmt(config.h);
  m["ppc"] = std::to_string(config.ppc);
  m["rotations"] = std::to_string(config.rotations);
  m["dt"] = fmt(dt);
  m["seed"] = std::to_string(config.seed);
  m["threads"] = std::to_string(config.threads);
  m["scheme"] = "rk3";
  m["initial_particles"] = std::to_string(report.rows.front().n_particles);
  return report;
}

void write_report_csv(const BenchmarkReport& report, std::ostream& out) {
  out << kReportHeader << '\n';
  out.precision(17);
  for (const auto& r : report.rows) {
    out << r.step << ',' << r.time << ',' << r.l2_error << ',' << r.mass_error << ',' << r.psi_min << ','
        << r.psi_max << ',' << r.n_particles << ',' << r.t_advect_s << ',' << r.t_assemble_s << ',' << r.t_solve_s
        << '\n';
  }
}

void emit_report(const BenchmarkReport& report, const std::string& path) {
  {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write report " + path);
    write_report_csv(report, out);
  }
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.metadata) meta[key] = value;
  std::ofstream out(path + ".meta.json");
  if (!out) throw InvalidArgument("cannot write report metadata for " + path);
  out << meta.dump(2) << '\n';
}

}  // namespace picproj
