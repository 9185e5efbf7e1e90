#pragma once

#include <filesystem>
#include <optional>

#include "hydro/stepper.hpp"

namespace hydro {

/// Shape description as it appears in scenario configs. `kind` is one of
/// box, cylinder, slab, rigid_plane, rigid_box, rigid_obj.
struct GeometrySpec {
  std::string kind;
  Eigen::Vector3d half_sizes{0.0, 0.0, 0.0};      // box, rigid_box
  double radius = 0.0, height = 0.0;              // cylinder
  double thickness = 0.0;                         // slab
  double extent = 0.0;                            // slab, rigid_plane
  double modulus = 0.0;                           // compliant kinds
  double resolution = 0.0;                        // compliant kinds
  std::filesystem::path path;                     // rigid_obj
};

struct BodySpec {
  std::string name;
  GeometrySpec geometry;
  double mass = 1.0;
  /// Principal inertia about the center of mass; computed from the shape
  /// and mass when absent (required for dynamic rigid_obj bodies).
  std::optional<Eigen::Vector3d> inertia_diagonal;
  bool anchored = false;
  RigidPose pose;
  Vector6d velocity = Vector6d::Zero();  // [angular; linear]
};

/// Pair-level contact material (applied to every body pair).
struct PairProperties {
  double friction = 0.0;     // mu
  double dissipation = 0.0;  // tau, seconds
};

struct Scenario {
  std::string name;
  std::vector<BodySpec> bodies;
  PairProperties contact;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  SolverConfig solver;
  double duration = 1.0;     // s
  int recording_stride = 1;  // record every N-th step (plus t = 0)
  /// When true, the substeps taken while resolving a stick/slip transition
  /// are recorded as extra trajectory rows between the regular grid points
  /// (the grid rows themselves are unaffected). Off by default so ordinary
  /// runs keep exactly floor(duration / (dt * stride)) + 1 rows; the
  /// spinning-disk benchmark turns it on because the terminal slip ratio
  /// is only readable inside the final transition.
  bool record_transitions = false;
  /// Body whose slip ratio epsilon = |v_xy| / (omega_z R) is recorded; must
  /// be a cylinder when set.
  std::string epsilon_body;
};

Scenario load_scenario(const std::filesystem::path& path);
World build_world(const Scenario& scenario);

/// Canonical scenarios used by the acceptance suite; the files under
/// scenarios/ mirror these.
Scenario make_coin_scenario(double epsilon0);
Scenario make_box_on_slab_scenario();
Scenario make_block_slide_scenario(double initial_speed);

struct TrajectorySample {
  double time = 0.0;
  std::vector<RigidPose> poses;          // per body
  std::vector<Vector6d> velocities;      // per body, anchored rows zero
  int contact_count = 0;
  double normal_force_sum = 0.0;         // N
  double epsilon = 0.0;                  // NaN when omega_z is zero
};

struct TrajectoryRecord {
  std::vector<std::string> body_names;
  bool has_epsilon = false;
  std::vector<TrajectorySample> samples;
};

/// Versioned CSV (schema header line). Columns: time, then per body
/// pos_{x,y,z}, quat_{w,x,y,z}, omega_{x,y,z}, vel_{x,y,z}, then contacts,
/// normal_force_sum, and epsilon when applicable.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);

struct RunOptions {
  std::filesystem::path output_directory;  // required for snapshots/dumps
  int snapshot_every = 0;                  // polygon soup every N steps
  bool dump_constraints = false;           // constraint CSV every N steps
};

struct RunResult {
  TrajectoryRecord trajectory;
  SystemState final_state;
  int steps = 0;
  int retries = 0;  // steps that needed the dt/2 fallback
  int max_newton_iterations = 0;
  double mean_broadphase_seconds = 0.0;
  double mean_narrowphase_seconds = 0.0;
  double mean_solve_seconds = 0.0;
};

/// Runs a scenario to completion. Steps that collapse the fastest body
/// point speed by more than half are re-run as recursive half steps so
/// stick/slip transitions are resolved rather than jumped over; a
/// non-converged step is retried once as two half steps, and a second
/// failure propagates with the failing time.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Terminal slip ratio of a spinning disk: epsilon at the last recorded
/// sample whose spin rate is still at or above `spin_cutoff`. Throws
/// "no spin" when the record starts below the cutoff and "did not stop"
/// when it never falls below it. The default cutoff sits orders of
/// magnitude below any dynamically meaningful spin, so with transition
/// recording on the sample is taken at the very end of the stick/slip
/// transition that pins the ratio, yet high enough that contact slip
/// speeds across almost the whole patch still exceed the stiction
/// velocity, keeping the measurement on the Coulomb branch.
double spinning_disk_epsilon(const TrajectoryRecord& record, int body,
                             double radius, double spin_cutoff = 1e-5);

struct StudyPoint {
  double h = 0.0;      // time step or mesh resolution
  double error = 0.0;  // relative trajectory error vs the reference run
};

struct StudyResult {
  std::vector<StudyPoint> points;
  double slope = 0.0;  // log-log least-squares fit
};

/// Least-squares slope of log(error) against log(h); requires >= 3 points.
double fitted_slope(const std::vector<StudyPoint>& points);

/// Sweeps the time step at fixed geometry. Every swept value and the
/// reference must divide the base recording interval so trajectories share
/// a common grid; errors are relative L2 norms over the stacked dynamic-body
/// positions of that grid.
StudyResult time_step_study(const Scenario& base,
                            const std::vector<double>& time_steps,
                            double reference_time_step);

/// Sweeps the mesh resolution of all compliant bodies at fixed time step.
StudyResult resolution_study(const Scenario& base,
                             const std::vector<double>& resolutions,
                             double reference_resolution);

void write_study_csv(std::ostream& out, const StudyResult& result);

struct TessellationRow {
  double time = 0.0;
  int faces_polygonal = 0;
  int faces_triangulated = 0;
  double solve_seconds_polygonal = 0.0;
  double solve_seconds_triangulated = 0.0;
};

struct TessellationReport {
  std::vector<TessellationRow> rows;
  double mean_face_ratio = 0.0;  // triangulated / polygonal, contact steps
  double max_force_relative_difference = 0.0;  // net elastic contact force
};

/// Steps the scenario in polygonal mode while shadow-solving each step in
/// triangulated mode, comparing face counts, solve times, and the net
/// elastic contact force (identical up to rounding because the pressure is
/// affine per polygon).
TessellationReport tessellation_report(const Scenario& scenario);

void write_tessellation_csv(std::ostream& out, const TessellationReport& report);

}  // namespace hydro
