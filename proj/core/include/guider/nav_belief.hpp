#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "guider/image.hpp"
#include "guider/occupancy_grid.hpp"

namespace guider::nav {

/// Navigation-phase hyper-parameters. Defaults are the tuned values the
/// pipeline ships with; validate() enforces the documented ranges.
struct NavParams {
    double cell_size = 0.05;          // meters per cell
    double gamma_base_free = 0.55;    // free-space relaxation factor
    double gamma_base_obj = 0.50;     // object-region relaxation factor
    double inflation_radius = 0.75;   // meters
    double dt_pred = 0.10;            // seconds between predicted poses
    double update_distance = 0.30;    // meters of travel per accepted update
    double d_max = 1.00;              // radial evidence radius, meters
    double motion_seed_threshold = 0.01; // beta: minimum motion for synergy seeds
    double gamma_decay = 0.25;        // motion-layer decay per update
    double motion_blend = 0.40;       // lambda: evidence blend into motion layer
    double synergy_radius = 0.15;     // meters
    double gamma_syn = 0.75;          // synergy-layer decay per update
    double eta_lb = 0.60;             // synergy lower bound
    double eta_0 = 0.70;              // synergy reset value
    double eta_inc = 0.05;            // synergy increment
    double eta_cap = 0.90;            // synergy cap
    std::array<double, 3> horizons = {5.0, 10.0, 30.0};        // seconds
    std::array<double, 3> horizon_weights = {0.60, 0.60, 0.85}; // alpha_i
    double inflate_low = 0.2;  // value at inflation_radius
    double inflate_high = 0.6; // value adjacent to an object
    int max_object_cells = 400; // occupied components larger than this are walls

    void validate() const;
};

struct BaseOdometry {
    double t = 0.0;  // seconds
    double x = 0.0;  // meters, global frame
    double y = 0.0;
    double vx = 0.0; // m/s
    double vy = 0.0;
};

/// Per-cell classification fixed at init time; drives the decay rule.
enum class BaseCellClass : std::uint8_t {
    FreeSpace = 0,    // plain free cell
    ObjectRegion = 1, // free cell inside an object inflation halo
    Occupied = 2,
    Unknown = 3,
};

/// Three co-registered belief layers plus the t=0 snapshot the base layer
/// relaxes toward. All layer values stay in [0,1] after every operation.
/// Geometry (origin, resolution) is copied from the grid at init so odometry
/// in the global frame lands on the right cells.
struct NavBeliefState {
    ScalarField base;
    ScalarField motion;
    ScalarField synergy;
    ScalarField base_initial; // snapshot of base at t=0 (after inflation)
    std::vector<std::uint8_t> cell_class; // BaseCellClass per cell
    double origin_x = 0.0;
    double origin_y = 0.0;
    double resolution = 0.05;
    double last_update_x = 0.0;
    double last_update_y = 0.0;
    bool has_last_update = false;
    int update_count = 0;

    int width() const { return base.width; }
    int height() const { return base.height; }
    double cell_center_x(int x) const { return origin_x + (x + 0.5) * resolution; }
    double cell_center_y(int y) const { return origin_y + (y + 0.5) * resolution; }
};

struct CellPeak {
    int x = 0;
    int y = 0;
    double value = 0.0;
};

/// Initializes the base layer from the grid (free 0.02, unknown 0, occupied 1),
/// inflates object-like occupied regions, and stores the snapshot.
/// Throws ConfigError on an empty grid.
NavBeliefState init_base_layer(const OccupancyGrid& grid, const NavParams& params);

/// Linear inflation around object-like occupied components: free cells within
/// inflation_radius of a component get max(current, high - (high-low)*d/r) where
/// d is the distance to the component boundary (distance to the nearest occupied
/// cell center minus one cell size, floored at 0). Occupied cells keep 1.0.
/// Components larger than max_object_cells (8-connected) inflate nothing.
/// Idempotent.
void inflate_objects(NavBeliefState& state, const OccupancyGrid& grid,
                     const NavParams& params);

/// One decay event. Base cells relax toward their rest value
/// (B <- rest + gamma*(B - rest)): free/unknown/halo cells rest at the t=0
/// snapshot; occupied cells rest at the top of the inflation band so map
/// context persists without pinning the combined maximum. Motion and synergy
/// decay multiplicatively (gamma_decay, gamma_syn).
void decay_layers(NavBeliefState& state, const NavParams& params);

/// True when odometry has moved at least update_distance since the last
/// accepted update (always true for the first sample).
bool motion_update_due(const NavBeliefState& state, const BaseOdometry& odo,
                       const NavParams& params);

/// Deposits multi-horizon radial evidence along the constant-velocity
/// extrapolation of `odo` and refreshes last_update_pose. Returns false (and
/// leaves the state untouched) when displacement is below update_distance.
/// For each horizon tau_i, poses (x + vx t, y + vy t) are sampled every
/// dt_pred for t in (0, tau_i]; each sample deposits E = max(0, 1 - d/d_max);
/// the blend is max_i alpha_i * E_i, and
/// motion <- clip(motion + lambda * blend, 0, 1). Zero velocity deposits
/// around the current pose.
bool update_motion_layer(NavBeliefState& state, const BaseOdometry& odo,
                         const NavParams& params);

/// Flood-fill synergy update. Seeds are cells with base >= 0.2 and
/// motion >= motion_seed_threshold; an 8-connected BFS from each seed visits
/// cells within synergy_radius (Euclidean, cell centers, meters). Each cell
/// visited by at least one seed is updated once per call:
/// below eta_lb -> eta_0, else min(value + eta_inc, eta_cap).
void update_synergy_layer(NavBeliefState& state, const NavParams& params);

/// Pointwise maximum of the three layers.
ScalarField combined_belief(const NavBeliefState& state);

/// Argmax cell of a field; ties break on the lowest row-major index.
CellPeak predicted_area(const ScalarField& field);

/// Replay-facing step: on an accepted odometry sample (displacement >=
/// update_distance) runs decay, motion deposit, and synergy update, in that
/// order. Returns whether the sample was accepted.
bool nav_step(NavBeliefState& state, const BaseOdometry& odo, const NavParams& params);

} // namespace guider::nav
