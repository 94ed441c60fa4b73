#include "guider/nav_belief.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace guider::nav {

namespace {

constexpr double kFreeInit = 0.02;
constexpr double kUnknownInit = 0.0;
constexpr double kOccupiedInit = 1.0;
constexpr double kSeedBaseMin = 0.2; // B_base threshold for synergy seeds

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

void NavParams::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!(cell_size > 0.0)) throw ConfigError("nav: cell_size must be > 0");
    if (!in_unit(gamma_base_free) || !in_unit(gamma_base_obj) ||
        !in_unit(gamma_decay) || !in_unit(gamma_syn))
        throw ConfigError("nav: decay factors must be in (0,1]");
    for (const double a : horizon_weights)
        if (!in_unit(a)) throw ConfigError("nav: horizon weights must be in (0,1]");
    if (!in_unit(motion_blend)) throw ConfigError("nav: motion_blend must be in (0,1]");
    if (!(eta_lb < eta_0 && eta_0 < eta_cap))
        throw ConfigError("nav: require eta_lb < eta_0 < eta_cap");
    if (!(inflate_low < inflate_high))
        throw ConfigError("nav: inflation band low must be below high");
    if (!(inflation_radius > 0.0) || !(d_max > 0.0) || !(synergy_radius > 0.0) ||
        !(dt_pred > 0.0) || !(update_distance > 0.0))
        throw ConfigError("nav: radii and step sizes must be > 0");
    for (const double h : horizons)
        if (!(h > 0.0)) throw ConfigError("nav: horizons must be > 0");
    if (max_object_cells < 1) throw ConfigError("nav: max_object_cells must be >= 1");
}

NavBeliefState init_base_layer(const OccupancyGrid& grid, const NavParams& params) {
    grid.validate();
    params.validate();

    NavBeliefState state;
    state.base = ScalarField(grid.width, grid.height, 0.0);
    state.motion = ScalarField(grid.width, grid.height, 0.0);
    state.synergy = ScalarField(grid.width, grid.height, 0.0);
    state.cell_class.assign(grid.cells.size(), static_cast<std::uint8_t>(BaseCellClass::FreeSpace));
    state.origin_x = grid.origin_x;
    state.origin_y = grid.origin_y;
    state.resolution = grid.resolution;

    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        switch (grid.cells[i]) {
        case CellState::Free:
            state.base.data[i] = kFreeInit;
            state.cell_class[i] = static_cast<std::uint8_t>(BaseCellClass::FreeSpace);
            break;
        case CellState::Unknown:
            state.base.data[i] = kUnknownInit;
            state.cell_class[i] = static_cast<std::uint8_t>(BaseCellClass::Unknown);
            break;
        case CellState::Occupied:
            state.base.data[i] = kOccupiedInit;
            state.cell_class[i] = static_cast<std::uint8_t>(BaseCellClass::Occupied);
            break;
        }
    }

    inflate_objects(state, grid, params);
    state.base_initial = state.base;
    return state;
}

void inflate_objects(NavBeliefState& state, const OccupancyGrid& grid,
                     const NavParams& params) {
    const int w = grid.width;
    const int h = grid.height;

    // Label 8-connected occupied components; components above the size cap
    // are walls/shelves and inflate nothing.
    std::vector<int> label(grid.cells.size(), -1);
    std::vector<std::vector<int>> components;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = grid.index(x, y);
            if (grid.cells[idx] != CellState::Occupied || label[idx] >= 0) continue;
            const int id = static_cast<int>(components.size());
            components.emplace_back();
            std::queue<std::pair<int, int>> queue;
            queue.emplace(x, y);
            label[idx] = id;
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop();
                components[id].push_back(static_cast<int>(grid.index(cx, cy)));
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (!grid.in_bounds(nx, ny)) continue;
                        const std::size_t nidx = grid.index(nx, ny);
                        if (grid.cells[nidx] != CellState::Occupied || label[nidx] >= 0) continue;
                        label[nidx] = id;
                        queue.emplace(nx, ny);
                    }
                }
            }
        }
    }

    const double res = grid.resolution;
    const double r = params.inflation_radius;
    const int reach = static_cast<int>(std::ceil((r + res) / res)) + 1;
    const double band = params.inflate_high - params.inflate_low;

    for (const auto& comp : components) {
        if (static_cast<int>(comp.size()) > params.max_object_cells) continue;
        for (const int cell : comp) {
            const int ox = cell % w;
            const int oy = cell / w;
            for (int dy = -reach; dy <= reach; ++dy) {
                for (int dx = -reach; dx <= reach; ++dx) {
                    const int nx = ox + dx;
                    const int ny = oy + dy;
                    if (!grid.in_bounds(nx, ny)) continue;
                    const std::size_t nidx = grid.index(nx, ny);
                    if (grid.cells[nidx] != CellState::Free) continue;
                    // Distance to the component boundary: center-to-center
                    // distance minus one cell size, floored at zero, so a cell
                    // adjacent to the object measures ~0 and gets the band top.
                    const double center_dist = std::hypot(dx * res, dy * res);
                    const double d = std::max(0.0, center_dist - res);
                    if (d > r) continue;
                    const double value = params.inflate_high - band * (d / r);
                    if (value > state.base.data[nidx]) state.base.data[nidx] = value;
                    state.cell_class[nidx] = static_cast<std::uint8_t>(BaseCellClass::ObjectRegion);
                }
            }
        }
    }
}

void decay_layers(NavBeliefState& state, const NavParams& params) {
    for (std::size_t i = 0; i < state.base.data.size(); ++i) {
        const auto cls = static_cast<BaseCellClass>(state.cell_class[i]);
        double rest = state.base_initial.data[i];
        double gamma = params.gamma_base_free;
        if (cls == BaseCellClass::ObjectRegion) {
            gamma = params.gamma_base_obj;
        } else if (cls == BaseCellClass::Occupied) {
            // Occupied cells settle at the inflation band top rather than
            // their 1.0 snapshot; a belief pinned at the global maximum would
            // freeze the combined argmax for the whole session.
            rest = std::min(rest, params.inflate_high);
            gamma = params.gamma_base_obj;
        }
        state.base.data[i] = clip01(rest + gamma * (state.base.data[i] - rest));
        state.motion.data[i] = clip01(state.motion.data[i] * params.gamma_decay);
        state.synergy.data[i] = clip01(state.synergy.data[i] * params.gamma_syn);
    }
}

bool motion_update_due(const NavBeliefState& state, const BaseOdometry& odo,
                       const NavParams& params) {
    if (!state.has_last_update) return true;
    const double dist = std::hypot(odo.x - state.last_update_x, odo.y - state.last_update_y);
    return dist >= params.update_distance;
}

bool update_motion_layer(NavBeliefState& state, const BaseOdometry& odo,
                         const NavParams& params) {
    if (!motion_update_due(state, odo, params)) return false;

    const int w = state.width();
    const int h = state.height();
    const double res = state.resolution;
    ScalarField blend(w, h, 0.0);

    const int reach = static_cast<int>(std::ceil(params.d_max / res)) + 1;
    const double min_x = state.origin_x - params.d_max;
    const double max_x = state.origin_x + w * res + params.d_max;
    const double min_y = state.origin_y - params.d_max;
    const double max_y = state.origin_y + h * res + params.d_max;

    for (std::size_t hz = 0; hz < params.horizons.size(); ++hz) {
        const double tau = params.horizons[hz];
        const double alpha = params.horizon_weights[hz];
        const long steps = std::lround(std::floor(tau / params.dt_pred + 1e-9));
        for (long k = 1; k <= steps; ++k) {
            const double t = k * params.dt_pred;
            const double px = odo.x + odo.vx * t;
            const double py = odo.y + odo.vy * t;
            if (px < min_x || px > max_x || py < min_y || py > max_y) continue;
            const int ccx = static_cast<int>(std::floor((px - state.origin_x) / res));
            const int ccy = static_cast<int>(std::floor((py - state.origin_y) / res));
            for (int gy = std::max(0, ccy - reach); gy <= std::min(h - 1, ccy + reach); ++gy) {
                for (int gx = std::max(0, ccx - reach); gx <= std::min(w - 1, ccx + reach); ++gx) {
                    const double dist = std::hypot(state.cell_center_x(gx) - px,
                                                   state.cell_center_y(gy) - py);
                    const double e = 1.0 - dist / params.d_max;
                    if (e <= 0.0) continue;
                    double& cell = blend.at(gx, gy);
                    cell = std::max(cell, alpha * e);
                }
            }
        }
    }

    for (std::size_t i = 0; i < state.motion.data.size(); ++i)
        state.motion.data[i] = clip01(state.motion.data[i] + params.motion_blend * blend.data[i]);

    state.last_update_x = odo.x;
    state.last_update_y = odo.y;
    state.has_last_update = true;
    ++state.update_count;
    return true;
}

void update_synergy_layer(NavBeliefState& state, const NavParams& params) {
    const int w = state.width();
    const int h = state.height();
    const double res = state.resolution;
    const int reach = static_cast<int>(std::ceil(params.synergy_radius / res));

    std::vector<std::uint8_t> to_update(state.synergy.data.size(), 0);
    std::vector<std::uint8_t> local(static_cast<std::size_t>(2 * reach + 1) * (2 * reach + 1));

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t sidx = state.base.index(sx, sy);
            if (state.base.data[sidx] < kSeedBaseMin) continue;
            if (state.motion.data[sidx] < params.motion_seed_threshold) continue;

            // 8-connected BFS bounded by Euclidean distance from this seed.
            std::fill(local.begin(), local.end(), 0);
            const int side = 2 * reach + 1;
            auto lidx = [&](int dx, int dy) {
                return static_cast<std::size_t>(dy + reach) * side + (dx + reach);
            };
            std::queue<std::pair<int, int>> queue;
            queue.emplace(0, 0);
            local[lidx(0, 0)] = 1;
            to_update[sidx] = 1;
            while (!queue.empty()) {
                const auto [dx, dy] = queue.front();
                queue.pop();
                for (int oy = -1; oy <= 1; ++oy) {
                    for (int ox = -1; ox <= 1; ++ox) {
                        if (ox == 0 && oy == 0) continue;
                        const int nx = dx + ox;
                        const int ny = dy + oy;
                        if (std::abs(nx) > reach || std::abs(ny) > reach) continue;
                        if (local[lidx(nx, ny)]) continue;
                        // Tolerance keeps cells at exactly r_syn inside.
                        if (std::hypot(nx * res, ny * res) > params.synergy_radius + 1e-9) continue;
                        const int gx = sx + nx;
                        const int gy = sy + ny;
                        if (gx < 0 || gx >= w || gy < 0 || gy >= h) continue;
                        local[lidx(nx, ny)] = 1;
                        to_update[state.base.index(gx, gy)] = 1;
                        queue.emplace(nx, ny);
                    }
                }
            }
        }
    }

    for (std::size_t i = 0; i < to_update.size(); ++i) {
        if (!to_update[i]) continue;
        double& v = state.synergy.data[i];
        v = (v < params.eta_lb) ? params.eta_0 : std::min(v + params.eta_inc, params.eta_cap);
    }
}

ScalarField combined_belief(const NavBeliefState& state) {
    ScalarField out(state.width(), state.height(), 0.0);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::max({state.base.data[i], state.motion.data[i], state.synergy.data[i]});
    return out;
}

CellPeak predicted_area(const ScalarField& field) {
    if (field.empty()) throw InputError("predicted_area: empty field");
    CellPeak peak{0, 0, field.data[0]};
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            const double v = field.at(x, y);
            if (v > peak.value) peak = CellPeak{x, y, v};
        }
    }
    return peak;
}

bool nav_step(NavBeliefState& state, const BaseOdometry& odo, const NavParams& params) {
    if (!motion_update_due(state, odo, params)) return false;
    decay_layers(state, params);
    update_motion_layer(state, odo, params);
    update_synergy_layer(state, params);
    return true;
}

} // namespace guider::nav
