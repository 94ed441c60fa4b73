#include <doctest.h>

#include <cmath>

#include "guider/nav_belief.hpp"
#include "guider/rng.hpp"

using namespace guider;
using namespace guider::nav;

namespace {

OccupancyGrid empty_grid(int side = 100) {
    return OccupancyGrid(side, side, 0.05, 0.0, 0.0, CellState::Free);
}

OccupancyGrid grid_with_object(int side = 100) {
    auto grid = empty_grid(side);
    grid.at(50, 50) = CellState::Occupied;
    return grid;
}

/// Closed-form motion evidence for one odometry update on a fresh layer.
double motion_oracle(const NavBeliefState& state, const NavParams& params,
                     const BaseOdometry& odo, int cx, int cy) {
    double blend = 0.0;
    for (std::size_t i = 0; i < params.horizons.size(); ++i) {
        const long steps = std::lround(std::floor(params.horizons[i] / params.dt_pred + 1e-9));
        for (long k = 1; k <= steps; ++k) {
            const double t = k * params.dt_pred;
            const double px = odo.x + odo.vx * t;
            const double py = odo.y + odo.vy * t;
            const double dist = std::hypot(state.cell_center_x(cx) - px,
                                           state.cell_center_y(cy) - py);
            const double e = std::max(0.0, 1.0 - dist / params.d_max);
            blend = std::max(blend, params.horizon_weights[i] * e);
        }
    }
    return std::min(1.0, params.motion_blend * blend);
}

} // namespace

TEST_CASE("base layer piecewise initialization") {
    // Object far enough from the probed cells that inflation cannot reach.
    OccupancyGrid grid(40, 40, 0.05, 0.0, 0.0, CellState::Free);
    grid.at(1, 1) = CellState::Unknown;
    grid.at(30, 30) = CellState::Occupied;
    NavParams params;
    const auto state = init_base_layer(grid, params);

    CHECK(state.base.at(0, 0) == doctest::Approx(0.02));
    CHECK(state.base.at(1, 1) == 0.0);
    CHECK(state.base.at(30, 30) == 1.0);
    CHECK(state.base_initial.at(30, 30) == 1.0);
}

TEST_CASE("empty grid rejected") {
    OccupancyGrid grid;
    CHECK_THROWS_AS(init_base_layer(grid, NavParams{}), ConfigError);
}

TEST_CASE("inflation profile around a single object") {
    NavParams params;
    const auto grid = grid_with_object();
    const auto state = init_base_layer(grid, params);

    // Adjacent cell: boundary distance ~0 -> band top.
    CHECK(state.base.at(51, 50) == doctest::Approx(0.6));
    // Cell whose boundary distance is exactly the inflation radius -> band low.
    // Center distance 16 cells = 0.80 m, minus one cell size = 0.75 m.
    CHECK(state.base.at(66, 50) == doctest::Approx(0.2));
    // Linear in between.
    const double d = 8 * 0.05 - 0.05; // cell (58,50)
    CHECK(state.base.at(58, 50) == doctest::Approx(0.6 - 0.4 * d / params.inflation_radius));
    // Beyond the radius: untouched free value.
    CHECK(state.base.at(80, 50) == doctest::Approx(0.02));
    // The object itself stays at 1.
    CHECK(state.base.at(50, 50) == 1.0);
    // Inflation is idempotent.
    auto again = state;
    inflate_objects(again, grid, params);
    CHECK(again.base.data == state.base.data);
}

TEST_CASE("large components are walls and inflate nothing") {
    NavParams params;
    auto grid = empty_grid(120);
    for (int x = 0; x < 120; ++x)
        for (int y = 0; y < 4; ++y) grid.at(x, y) = CellState::Occupied; // 480 > 400 cells
    const auto state = init_base_layer(grid, params);
    CHECK(state.base.at(60, 6) == doctest::Approx(0.02));
}

TEST_CASE("decay fixed points and rates") {
    NavParams params;
    auto state = init_base_layer(grid_with_object(), params);

    state.motion.at(10, 10) = 0.8;
    state.synergy.at(10, 10) = 0.9;
    const double inflated = state.base.at(51, 50);
    decay_layers(state, params);

    // Free cell at its initial value is a fixed point.
    CHECK(state.base.at(5, 5) == doctest::Approx(0.02));
    // Inflated cells rest at their snapshot too.
    CHECK(state.base.at(51, 50) == doctest::Approx(inflated));
    // Motion and synergy decay multiplicatively.
    CHECK(state.motion.at(10, 10) == doctest::Approx(0.8 * 0.25));
    CHECK(state.synergy.at(10, 10) == doctest::Approx(0.9 * 0.75));
    // Perturbed free cell relaxes toward its snapshot at gamma_base_free.
    state.base.at(5, 5) = 0.5;
    decay_layers(state, params);
    CHECK(state.base.at(5, 5) == doctest::Approx(0.02 + 0.55 * (0.5 - 0.02)));
    // Occupied cells settle toward the inflation band top.
    CHECK(state.base.at(50, 50) == doctest::Approx(0.6 + 0.5 * 0.5 * (1.0 - 0.6)));
}

TEST_CASE("motion update deposits the closed-form radial evidence") {
    NavParams params;
    auto state = init_base_layer(empty_grid(), params);

    BaseOdometry odo{0.0, 2.0, 2.0, 0.3, 0.1};
    REQUIRE(update_motion_layer(state, odo, params));

    Rng rng(41);
    for (int i = 0; i < 1000; ++i) {
        const int cx = static_cast<int>(rng.uniform_int(0, 99));
        const int cy = static_cast<int>(rng.uniform_int(0, 99));
        const double expected = motion_oracle(state, params, odo, cx, cy);
        CHECK(state.motion.at(cx, cy) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("motion update blend weights") {
    // A cell exactly on a predicted pose within all three horizons gets the
    // largest alpha.
    NavParams params;
    auto state = init_base_layer(empty_grid(), params);
    BaseOdometry odo{0.0, 1.0, 2.525, 0.5, 0.0};
    REQUIRE(update_motion_layer(state, odo, params));
    // Cell (30,50) center (1.525, 2.525) sits on the path at t = 1.05 s;
    // samples at 1.0 and 1.1 are 0.025 m away -> E = 0.975 under every
    // horizon; blend = max alpha = 0.85.
    CHECK(state.motion.at(30, 50) ==
          doctest::Approx(params.motion_blend * 0.85 * 0.975).epsilon(1e-9));
}

TEST_CASE("motion update is a no-op below the displacement threshold") {
    NavParams params;
    auto state = init_base_layer(empty_grid(), params);
    REQUIRE(update_motion_layer(state, {0.0, 2.0, 2.0, 0.5, 0.0}, params));
    const auto snapshot = state.motion.data;
    CHECK_FALSE(update_motion_layer(state, {1.0, 2.2, 2.0, 0.5, 0.0}, params));
    CHECK(state.motion.data == snapshot);
    CHECK(update_motion_layer(state, {2.0, 2.31, 2.0, 0.5, 0.0}, params));
}

TEST_CASE("zero velocity deposits stationary evidence") {
    NavParams params;
    auto state = init_base_layer(empty_grid(), params);
    REQUIRE(update_motion_layer(state, {0.0, 2.525, 2.525, 0.0, 0.0}, params));
    // Cell under the robot: distance 0 -> E = 1, blend = 0.85.
    CHECK(state.motion.at(50, 50) == doctest::Approx(0.4 * 0.85));
    // Far cell: nothing.
    CHECK(state.motion.at(5, 5) == 0.0);
}

TEST_CASE("synergy update rule and seeding") {
    NavParams params;
    auto state = init_base_layer(empty_grid(), params);

    state.base.at(40, 40) = 0.5;   // seed: base >= 0.2
    state.motion.at(40, 40) = 0.5; // and motion >= beta

    state.synergy.at(40, 40) = 0.55;
    state.synergy.at(41, 40) = 0.88;
    update_synergy_layer(state, params);

    CHECK(state.synergy.at(40, 40) == doctest::Approx(0.70)); // below eta_lb -> eta_0
    CHECK(state.synergy.at(41, 40) == doctest::Approx(0.90)); // min(0.93, cap)
    // Within the 0.15 m radius (3 cells).
    CHECK(state.synergy.at(43, 40) == doctest::Approx(0.70));
    // Outside the radius.
    CHECK(state.synergy.at(44, 40) == 0.0);
}

TEST_CASE("cells below the base threshold never seed") {
    NavParams params;
    auto state = init_base_layer(empty_grid(), params);
    state.base.at(40, 40) = 0.1;
    state.motion.at(40, 40) = 0.9;
    update_synergy_layer(state, params);
    for (const double v : state.synergy.data) CHECK(v == 0.0);
}

TEST_CASE("synergy hysteresis: two consecutive visits") {
    NavParams params;
    auto state = init_base_layer(empty_grid(), params);
    state.base.at(40, 40) = 0.5;
    state.motion.at(40, 40) = 0.5;
    state.synergy.at(40, 40) = 0.3;

    update_synergy_layer(state, params);
    CHECK(state.synergy.at(40, 40) == doctest::Approx(0.70));
    update_synergy_layer(state, params);
    CHECK(state.synergy.at(40, 40) == doctest::Approx(0.75));
}

TEST_CASE("combined belief equals the pointwise max oracle") {
    NavParams params;
    auto state = init_base_layer(grid_with_object(), params);
    Rng rng(7);
    for (std::size_t i = 0; i < state.motion.data.size(); ++i) {
        state.motion.data[i] = rng.uniform();
        state.synergy.data[i] = rng.uniform();
    }
    const auto combined = combined_belief(state);
    for (std::size_t i = 0; i < combined.data.size(); ++i) {
        const double expected = std::max(state.base.data[i],
                                         std::max(state.motion.data[i], state.synergy.data[i]));
        CHECK(combined.data[i] == expected);
    }
    // Idempotent: max of the max field with itself is itself.
    CHECK(predicted_area(combined).value ==
          predicted_area(combined_belief(state)).value);
}

TEST_CASE("combined belief examples") {
    NavParams params;
    auto state = init_base_layer(empty_grid(4), params);
    state.base.at(1, 1) = 0.6;
    state.motion.at(1, 1) = 0.4;
    state.synergy.at(1, 1) = 0.9;
    const auto combined = combined_belief(state);
    CHECK(combined.at(1, 1) == 0.9);
    CHECK(combined.at(0, 0) == doctest::Approx(0.02));
}

TEST_CASE("predicted area tie-breaking") {
    ScalarField field(4, 4, 0.0);
    field.at(2, 1) = 0.8;
    field.at(1, 2) = 0.8;
    const auto peak = predicted_area(field); // row 1 beats row 2
    CHECK(peak.x == 2);
    CHECK(peak.y == 1);

    ScalarField uniform(3, 3, 0.5);
    const auto p2 = predicted_area(uniform);
    CHECK(p2.x == 0);
    CHECK(p2.y == 0);
}

TEST_CASE("layers stay in [0,1] under random operation sequences") {
    NavParams params;
    auto grid = grid_with_object();
    auto state = init_base_layer(grid, params);
    Rng rng(99);
    double x = 2.5, y = 2.5;
    for (int step = 0; step < 300; ++step) {
        const int op = static_cast<int>(rng.uniform_int(0, 3));
        if (op == 0) {
            x += rng.uniform(-0.5, 0.5);
            y += rng.uniform(-0.5, 0.5);
            update_motion_layer(state, {0.0, x, y, rng.uniform(-3, 3), rng.uniform(-3, 3)},
                                params);
        } else if (op == 1) {
            decay_layers(state, params);
        } else if (op == 2) {
            update_synergy_layer(state, params);
        } else {
            inflate_objects(state, grid, params);
        }
        for (const auto* layer : {&state.base, &state.motion, &state.synergy})
            for (const double v : layer->data) {
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0);
            }
    }
}

TEST_CASE("identical inputs give bit-identical layer histories") {
    NavParams params;
    auto a = init_base_layer(grid_with_object(), params);
    auto b = init_base_layer(grid_with_object(), params);
    const BaseOdometry seq[] = {
        {0.0, 2.0, 2.0, 0.4, 0.1}, {1.0, 2.4, 2.1, 0.4, 0.1}, {2.0, 2.8, 2.2, 0.4, 0.1}};
    for (const auto& odo : seq) {
        nav_step(a, odo, params);
        nav_step(b, odo, params);
        REQUIRE(a.base.data == b.base.data);
        REQUIRE(a.motion.data == b.motion.data);
        REQUIRE(a.synergy.data == b.synergy.data);
    }
}
