#include "guider/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

namespace guider {

namespace {

using FieldRef = std::variant<double*, int*>;

/// Name -> field map; one flat registry keeps load, save, and override in sync.
std::map<std::string, FieldRef> field_registry(Config& c) {
    std::map<std::string, FieldRef> reg;
    auto add = [&](const char* name, auto* field) { reg.emplace(name, field); };

    add("nav.cell_size", &c.nav.cell_size);
    add("nav.gamma_base_free", &c.nav.gamma_base_free);
    add("nav.gamma_base_obj", &c.nav.gamma_base_obj);
    add("nav.inflation_radius", &c.nav.inflation_radius);
    add("nav.dt_pred", &c.nav.dt_pred);
    add("nav.update_distance", &c.nav.update_distance);
    add("nav.d_max", &c.nav.d_max);
    add("nav.motion_seed_threshold", &c.nav.motion_seed_threshold);
    add("nav.gamma_decay", &c.nav.gamma_decay);
    add("nav.motion_blend", &c.nav.motion_blend);
    add("nav.synergy_radius", &c.nav.synergy_radius);
    add("nav.gamma_syn", &c.nav.gamma_syn);
    add("nav.eta_lb", &c.nav.eta_lb);
    add("nav.eta_0", &c.nav.eta_0);
    add("nav.eta_inc", &c.nav.eta_inc);
    add("nav.eta_cap", &c.nav.eta_cap);
    add("nav.horizon_1", &c.nav.horizons[0]);
    add("nav.horizon_2", &c.nav.horizons[1]);
    add("nav.horizon_3", &c.nav.horizons[2]);
    add("nav.horizon_weight_1", &c.nav.horizon_weights[0]);
    add("nav.horizon_weight_2", &c.nav.horizon_weights[1]);
    add("nav.horizon_weight_3", &c.nav.horizon_weights[2]);
    add("nav.inflate_low", &c.nav.inflate_low);
    add("nav.inflate_high", &c.nav.inflate_high);
    add("nav.max_object_cells", &c.nav.max_object_cells);

    add("geom.min_range", &c.geom.min_range);
    add("geom.merge_voxel", &c.geom.merge_voxel);
    add("geom.workspace_min_x", &c.geom.workspace.min.x());
    add("geom.workspace_min_y", &c.geom.workspace.min.y());
    add("geom.workspace_min_z", &c.geom.workspace.min.z());
    add("geom.workspace_max_x", &c.geom.workspace.max.x());
    add("geom.workspace_max_y", &c.geom.workspace.max.y());
    add("geom.workspace_max_z", &c.geom.workspace.max.z());
    add("geom.z_band_min", &c.geom.z_band_min);
    add("geom.z_band_max", &c.geom.z_band_max);
    add("geom.plane_voxel", &c.geom.plane_voxel);
    add("geom.plane_dist_thresh", &c.geom.plane_dist_thresh);
    add("geom.plane_iterations", &c.geom.plane_iterations);
    add("geom.plane_inlier_remove", &c.geom.plane_inlier_remove);
    add("geom.normal_radius", &c.geom.normal_radius);
    add("geom.normal_knn", &c.geom.normal_knn);
    add("geom.cluster_normal_scale", &c.geom.cluster_normal_scale);
    add("geom.min_cluster_size", &c.geom.min_cluster_size);
    add("geom.cluster_eps", &c.geom.cluster_eps);

    add("fusion.saliency_threshold", &c.fusion.saliency_threshold);
    add("fusion.stretch_epsilon", &c.fusion.stretch_epsilon);
    add("fusion.max_area_frac", &c.fusion.max_area_frac);
    add("fusion.min_confidence", &c.fusion.min_confidence);
    add("fusion.weight_single", &c.fusion.weight_single);
    add("fusion.weight_both", &c.fusion.weight_both);

    add("gripper.half_aperture", &c.gripper.half_aperture);
    add("gripper.finger_thickness", &c.gripper.finger_thickness);
    add("gripper.clearance_extension", &c.gripper.clearance_extension);

    add("cascade.sigma_c", &c.cascade.sigma_c);
    add("cascade.lambda_in", &c.cascade.lambda_in);
    add("cascade.lambda_out", &c.cascade.lambda_out);
    add("cascade.alpha_depth", &c.cascade.alpha_depth);
    add("cascade.z_nominal", &c.cascade.z_nominal);
    add("cascade.depth_apply_threshold", &c.cascade.depth_apply_threshold);
    add("cascade.floor_eps", &c.cascade.floor_eps);
    add("cascade.pool_threshold", &c.cascade.pool_threshold);
    add("cascade.min_component_px", &c.cascade.min_component_px);
    add("cascade.g_min", &c.cascade.g_min);
    add("cascade.g_max", &c.cascade.g_max);
    add("cascade.relevance_threshold", &c.cascade.relevance_threshold);

    add("eef.grip_radius", &c.eef.grip_radius);
    add("eef.grip_height", &c.eef.grip_height);
    add("eef.alpha_growth", &c.eef.alpha_growth);
    add("eef.alpha_decay", &c.eef.alpha_decay);
    add("eef.gamma_v", &c.eef.gamma_v);
    add("eef.gamma_a", &c.eef.gamma_a);
    add("eef.delta", &c.eef.delta);
    add("eef.kappa", &c.eef.kappa);
    add("eef.p_cap", &c.eef.p_cap);
    add("eef.low_evidence_threshold", &c.eef.low_evidence_threshold);
    add("eef.dt", &c.eef.dt);
    add("eef.beta_topk", &c.eef.beta_topk);
    add("eef.beta_other", &c.eef.beta_other);
    add("eef.top_k", &c.eef.top_k);
    add("eef.predict_horizon", &c.eef.predict_horizon);
    add("eef.p_max", &c.eef.p_max);
    add("eef.approach_snap", &c.eef.approach_snap);

    return reg;
}

std::string format_value(const FieldRef& ref) {
    char buf[40];
    if (std::holds_alternative<double*>(ref)) {
        std::snprintf(buf, sizeof(buf), "%.17g", *std::get<double*>(ref));
    } else {
        std::snprintf(buf, sizeof(buf), "%d", *std::get<int*>(ref));
    }
    return buf;
}

void parse_into(const FieldRef& ref, const std::string& key, const std::string& value) {
    try {
        if (std::holds_alternative<double*>(ref)) {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            *std::get<double*>(ref) = v;
        } else {
            std::size_t used = 0;
            const int v = std::stoi(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            *std::get<int*>(ref) = v;
        }
    } catch (const std::exception&) {
        throw ConfigError("config: bad value for " + key + ": '" + value + "'");
    }
}

} // namespace

void apply_override(Config& config, const std::string& key, const std::string& value) {
    auto reg = field_registry(config);
    const auto it = reg.find(key);
    if (it == reg.end()) throw ConfigError("config: unknown key '" + key + "'");
    parse_into(it->second, key, value);
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());

    Config config;
    auto reg = field_registry(config);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = reg.find(key);
        if (it == reg.end())
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        parse_into(it->second, key, value);
    }
    config.validate();
    return config;
}

std::string serialize_config(const Config& config) {
    auto reg = field_registry(const_cast<Config&>(config));
    std::ostringstream out;
    for (const auto& [key, ref] : reg) out << key << "=" << format_value(ref) << "\n";
    return out.str();
}

void save_config(const Config& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config " + path.string());
    out << serialize_config(config);
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace guider
