#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guider/errors.hpp"

namespace guider::replay {

/// One JSON-lines odometry sample: {t, frame, x, y, z, vx, vy, vz}.
struct OdoSample {
    double t = 0.0;
    std::string frame;
    double x = 0.0, y = 0.0, z = 0.0;
    double vx = 0.0, vy = 0.0, vz = 0.0;
};

/// Closed polygon in world meters (navigation ground-truth region).
struct RegionPolygon {
    std::vector<std::pair<double, double>> vertices;

    /// Even-odd point-in-polygon test.
    bool contains(double x, double y) const;
};

struct MaskEntry {
    std::string mask_file;
    double confidence = 1.0;
    double prompt_u = 0.0;
    double prompt_v = 0.0;
};

struct NavPhase {
    std::vector<OdoSample> odometry;
    std::filesystem::path grid_pgm;
    std::filesystem::path grid_meta;
    RegionPolygon ground_truth_region;
    double contact_t = 0.0;
};

struct ManipPhase {
    std::vector<OdoSample> odometry; // TCP stream, camera frame
    std::filesystem::path saliency_pgm;
    std::filesystem::path depth_pgm; // 16-bit, millimeters
    std::filesystem::path intrinsics_txt;
    std::vector<MaskEntry> masks;
    int ground_truth_object = -1;
    /// Optional physical target position (camera frame). When present, the
    /// replay resolves the ground-truth id as the nearest proposal centroid,
    /// which keeps the target stable under pipeline ablations that reorder
    /// proposal ranks.
    std::optional<std::array<double, 3>> ground_truth_xyz;
    double command_t = 0.0;
};

/// A recorded or synthetic session: manifest.json plus streams and assets in
/// one directory.
struct SessionLog {
    std::filesystem::path dir;
    std::optional<NavPhase> nav;
    std::optional<ManipPhase> manip;
    /// Free-form numeric annotations (e.g. scripted redirection instants).
    std::map<std::string, double> annotations;
};

/// Loads and validates a session directory. Schema violations raise
/// InputError naming the offending file and line.
SessionLog load_session_log(const std::filesystem::path& dir);

/// Writers used by the scenario generator (and tests).
void write_odometry_jsonl(const std::vector<OdoSample>& samples,
                          const std::filesystem::path& path);
std::vector<OdoSample> read_odometry_jsonl(const std::filesystem::path& path);
void write_masks_manifest(const std::vector<MaskEntry>& masks,
                          const std::filesystem::path& path);
void write_session_manifest(const SessionLog& log, const std::filesystem::path& path);

} // namespace guider::replay
