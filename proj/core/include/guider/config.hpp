#pragma once

#include <filesystem>
#include <string>

#include "guider/cascade.hpp"
#include "guider/eef.hpp"
#include "guider/fusion.hpp"
#include "guider/grasp.hpp"
#include "guider/nav_belief.hpp"
#include "guider/scene_geometry.hpp"

namespace guider {

/// All tunables, defaulted to the shipped values. File format is flat
/// `group.key=value` text (e.g. nav.d_max=1.0); unknown keys are rejected so
/// typos fail loudly.
struct Config {
    nav::NavParams nav;
    geom::GeomParams geom;
    fusion::FusionParams fusion;
    grasp::GripperSpec gripper;
    cascade::CascadeParams cascade;
    eef::EefParams eef;

    void validate() const {
        nav.validate();
        geom.validate();
        fusion.validate();
        gripper.validate();
        cascade.validate();
        eef.validate();
    }
};

Config load_config(const std::filesystem::path& path);
void save_config(const Config& config, const std::filesystem::path& path);

/// Applies one `group.key=value` override. Throws ConfigError on unknown keys
/// or unparsable values.
void apply_override(Config& config, const std::string& key, const std::string& value);

/// Canonical serialization (sorted keys, shortest round-trip formatting).
std::string serialize_config(const Config& config);

} // namespace guider
