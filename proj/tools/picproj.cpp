#include "picproj/bench.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

void finish(const picproj::BenchmarkReport& report, const std::string& out) {
  if (out == "-") {
    picproj::write_report_csv(report, std::cout);
  } else {
    picproj::emit_report(report, out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-in-cell projection benchmarks on triangular meshes"};
  app.require_subcommand(1);

  picproj::PulseConfig pulse;
  std::string pulse_out = "-";
  bool pulse_no_timing = false;
  auto* p = app.add_subcommand("pulse", "Sinusoidal pulse translated over the bi-periodic unit square");
  p->add_option("--k", pulse.k, "Polynomial order of the mesh field")->check(CLI::Range(0, 6))->capture_default_str();
  p->add_option("--n", pulse.n, "Cells per axis (2 n^2 triangles)")->check(CLI::PositiveNumber)->capture_default_str();
  auto* dt_opt = p->add_option("--dt", pulse.dt, "Time step (default 1.1 / n)")->check(CLI::PositiveNumber);
  p->add_option("--steps", pulse.steps, "Number of steps (default: reach t = 1)")->check(CLI::NonNegativeNumber);
  p->add_option("--projection", pulse.projection, "Particle-to-mesh projection")
      ->check(CLI::IsMember({"l2", "pde"}))
      ->capture_default_str();
  p->add_option("--beta", pulse.beta, "Facet penalty of the PDE projection")->check(CLI::PositiveNumber)->capture_default_str();
  p->add_option("--zeta", pulse.zeta, "Gradient penalty of the PDE projection")->check(CLI::NonNegativeNumber)->capture_default_str();
  p->add_option("--seeding", pulse.seeding, "Particle seeding")->check(CLI::IsMember({"lattice", "random"}))->capture_default_str();
  p->add_option("--ppc", pulse.ppc, "Target particles per cell")->check(CLI::PositiveNumber)->capture_default_str();
  p->add_option("--seed", pulse.seed, "Seed for random seeding")->capture_default_str();
  p->add_option("--threads", pulse.threads, "Worker threads for cell loops")->check(CLI::PositiveNumber)->capture_default_str();
  std::string pulse_init = "interpolant";
  p->add_option("--init", pulse_init, "Particle values from the mesh interpolant or the analytic profile")
      ->check(CLI::IsMember({"interpolant", "analytic"}))
      ->capture_default_str();
  p->add_option("--out", pulse_out, "CSV report path ('-' for stdout)")->capture_default_str();
  p->add_flag("--no-timing", pulse_no_timing, "Write zeros in the timing columns");

  picproj::SlottedDiskConfig disk;
  std::string disk_out = "-";
  bool disk_no_timing = false;
  auto* d = app.add_subcommand("slotted-disk", "Slotted disk in solid body rotation");
  d->set_help_flag("--help", "Print this help message and exit");  // frees -h for the mesh size
  d->add_option("--case", disk.test_case, "1: bounded l2, 2: PDE zeta=0, 3: PDE zeta=30")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  d->add_option("--h", disk.h, "Target mesh size")->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--ppc", disk.ppc, "Particles per cell")->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--rotations", disk.rotations, "Full rotations (100 steps each)")->check(CLI::NonNegativeNumber)->capture_default_str();
  d->add_option("--seed", disk.seed, "Seed for particle seeding")->capture_default_str();
  d->add_option("--threads", disk.threads, "Worker threads for cell loops")->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--out", disk_out, "CSV report path ('-' for stdout)")->capture_default_str();
  d->add_flag("--no-timing", disk_no_timing, "Write zeros in the timing columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*p) {
      if (dt_opt->count() == 0) pulse.dt = 1.1 / static_cast<double>(pulse.n);
      pulse.record_timings = !pulse_no_timing;
      pulse.analytic_init = pulse_init == "analytic";
      finish(picproj::run_pulse(pulse), pulse_out);
    } else {
      disk.record_timings = !disk_no_timing;
      finish(picproj::run_slotted_disk(disk), disk_out);
    }
  } catch (const picproj::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
