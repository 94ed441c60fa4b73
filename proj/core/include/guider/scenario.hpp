#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "guider/config.hpp"
#include "guider/session_log.hpp"

namespace guider::scenario {

/// Synthetic session templates. t1/t2 stress the navigation layers, t3 the
/// end-effector evolution, t4 mixed tool geometry, t5 an object the gripper
/// cannot pinch.
enum class Template {
    T1Direct,
    T2BaseRedirect,
    T3ManipRedirect,
    T4Tool,
    T5Infeasible,
};

/// Accepts t1_direct, t2_base_redirect, t3_manip_redirect, t4_tool,
/// t5_infeasible. Throws ConfigError on anything else.
Template parse_template(const std::string& name);
std::string template_name(Template tpl);

struct ScenarioSpec {
    Template tpl = Template::T1Direct;
    std::uint64_t seed = 0;
    double base_noise_sigma = 0.002; // meters, odometry position jitter
    double tcp_noise_sigma = 0.001;
};

struct ScenarioInfo {
    std::string name;
    double nav_redirect_t = -1.0;   // < 0: no scripted redirection
    double manip_redirect_t = -1.0;
    double nav_contact_t = 0.0;
    double manip_command_t = 0.0;
};

/// Writes a complete session directory (grid, streams, saliency, masks,
/// depth, intrinsics, manifest). The ground-truth object id is resolved by
/// running the perception stack on the generated assets. Deterministic per
/// (template, seed).
ScenarioInfo generate_scenario(const ScenarioSpec& spec, const Config& config,
                               const std::filesystem::path& out_dir);

} // namespace guider::scenario
