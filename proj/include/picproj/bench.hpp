#pragma once

#include "picproj/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace picproj {

struct ReportRow {
  int step = 0;
  double time = 0.0;
  double l2_error = 0.0;
  double mass_error = 0.0;  // |int psi_h(t) - int psi_h(0)|
  double psi_min = 0.0;
  double psi_max = 0.0;
  Index n_particles = 0;
  double t_advect_s = 0.0;
  double t_assemble_s = 0.0;
  double t_solve_s = 0.0;
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;
  /// Run configuration and summary values, written to the metadata sidecar.
  std::map<std::string, std::string> metadata;
  /// int |psi_h(0)|, the scale for relative mass errors.
  double mass_scale = 0.0;
  /// Largest per-cell conservation residual over all steps (PDE runs only).
  double max_local_imbalance = 0.0;
  Index cells = 0;
};

struct PulseConfig {
  int k = 1;
  Index n = 11;
  double dt = 0.1;
  int steps = -1;  // negative: run to t = 1
  std::string projection = "l2";  // "l2" or "pde"
  double beta = 1e-6;
  double zeta = 0.0;
  double theta = 1.0;
  std::string seeding = "lattice";  // "lattice" or "random"
  double ppc = 15.0;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Particle values from the analytic profile instead of the nodal
  /// interpolant of the profile on the mesh.
  bool analytic_init = false;
  bool record_timings = true;
};

struct SlottedDiskConfig {
  int test_case = 1;  // 1: bounded l2, 2: PDE zeta = 0, 3: PDE zeta = 30
  double h = 0.0177;
  Index ppc = 25;
  int rotations = 2;
  int steps_per_rotation = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  bool record_timings = true;
};

/// Sinusoidal pulse translated with a = (1, 1) on the bi-periodic unit square.
BenchmarkReport run_pulse(const PulseConfig& config);

/// Slotted disk in solid body rotation a = pi (-y, x) on the disk x^2 + y^2 <= 1/2.
BenchmarkReport run_slotted_disk(const SlottedDiskConfig& config);

inline constexpr const char* kReportHeader =
    "step,time,l2_error,mass_error,psi_min,psi_max,n_particles,t_advect_s,t_assemble_s,t_solve_s";

void write_report_csv(const BenchmarkReport& report, std::ostream& out);
/// Writes the CSV to `path` and the metadata to `path + ".meta.json"`.
void emit_report(const BenchmarkReport& report, const std::string& path);

/// Slotted-disk indicator at t = 0.
double slotted_disk_indicator(double x, double y);

}  // namespace picproj
