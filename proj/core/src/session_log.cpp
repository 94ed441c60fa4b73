#include "guider/session_log.hpp"

#include <fstream>

#include <json.hpp>

namespace guider::replay {

using nlohmann::json;

bool RegionPolygon::contains(double x, double y) const {
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& [xi, yi] = vertices[i];
        const auto& [xj, yj] = vertices[j];
        if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi)
            inside = !inside;
    }
    return inside;
}

namespace {

json parse_line(const std::string& line, const std::filesystem::path& path, int line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
}

double need_number(const json& j, const char* key, const std::filesystem::path& path,
                   int line_no) {
    if (!j.contains(key) || !j[key].is_number())
        throw InputError(path.string() + ":" + std::to_string(line_no) +
                         ": missing numeric field '" + key + "'");
    return j[key].get<double>();
}

void check_monotone(const std::vector<OdoSample>& samples, const std::filesystem::path& path) {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].t > samples[i - 1].t))
            throw InputError(path.string() + ":" + std::to_string(i + 1) +
                             ": timestamps must be strictly increasing");
}

void require_file(const std::filesystem::path& path, const char* what) {
    if (!std::filesystem::exists(path))
        throw InputError(std::string(what) + " not found: " + path.string());
}

} // namespace

std::vector<OdoSample> read_odometry_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<OdoSample> samples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(line, path, line_no);
        OdoSample s;
        s.t = need_number(j, "t", path, line_no);
        s.x = need_number(j, "x", path, line_no);
        s.y = need_number(j, "y", path, line_no);
        s.z = need_number(j, "z", path, line_no);
        s.vx = need_number(j, "vx", path, line_no);
        s.vy = need_number(j, "vy", path, line_no);
        s.vz = need_number(j, "vz", path, line_no);
        s.frame = j.value("frame", "");
        samples.push_back(std::move(s));
    }
    check_monotone(samples, path);
    return samples;
}

void write_odometry_jsonl(const std::vector<OdoSample>& samples,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& s : samples) {
        json j;
        j["t"] = s.t;
        j["frame"] = s.frame;
        j["x"] = s.x;
        j["y"] = s.y;
        j["z"] = s.z;
        j["vx"] = s.vx;
        j["vy"] = s.vy;
        j["vz"] = s.vz;
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_masks_manifest(const std::vector<MaskEntry>& masks,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& m : masks) {
        json j;
        j["mask_file"] = m.mask_file;
        j["confidence"] = m.confidence;
        j["prompt_u"] = m.prompt_u;
        j["prompt_v"] = m.prompt_v;
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

std::vector<MaskEntry> read_masks_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<MaskEntry> masks;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(line, path, line_no);
        MaskEntry m;
        if (!j.contains("mask_file") || !j["mask_file"].is_string())
            throw InputError(path.string() + ":" + std::to_string(line_no) +
                             ": missing 'mask_file'");
        m.mask_file = j["mask_file"].get<std::string>();
        m.confidence = need_number(j, "confidence", path, line_no);
        m.prompt_u = need_number(j, "prompt_u", path, line_no);
        m.prompt_v = need_number(j, "prompt_v", path, line_no);
        masks.push_back(std::move(m));
    }
    return masks;
}

} // namespace

SessionLog load_session_log(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    require_file(manifest_path, "session manifest");

    std::ifstream in(manifest_path);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw InputError(manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("phases") || !manifest["phases"].is_object())
        throw InputError(manifest_path.string() + ": missing 'phases' object");

    SessionLog log;
    log.dir = dir;
    const json& phases = manifest["phases"];

    if (phases.contains("navigation")) {
        const json& p = phases["navigation"];
        NavPhase nav;
        nav.grid_pgm = dir / p.value("grid", "grid.pgm");
        nav.grid_meta = dir / p.value("grid_meta", "grid.meta");
        require_file(nav.grid_pgm, "occupancy grid");
        require_file(nav.grid_meta, "grid metadata");
        const auto odo_path = dir / p.value("odometry", "base_odometry.jsonl");
        require_file(odo_path, "base odometry");
        nav.odometry = read_odometry_jsonl(odo_path);
        if (nav.odometry.empty())
            throw InputError(odo_path.string() + ": empty odometry stream");
        if (!p.contains("contact_t") || !p["contact_t"].is_number())
            throw InputError(manifest_path.string() + ": navigation needs 'contact_t'");
        nav.contact_t = p["contact_t"].get<double>();
        if (!p.contains("ground_truth_region") || !p["ground_truth_region"].is_array() ||
            p["ground_truth_region"].size() < 3)
            throw InputError(manifest_path.string() +
                             ": navigation needs a 'ground_truth_region' polygon (>= 3 vertices)");
        for (const auto& v : p["ground_truth_region"]) {
            if (!v.is_array() || v.size() != 2)
                throw InputError(manifest_path.string() + ": region vertices must be [x, y]");
            nav.ground_truth_region.vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
        }
        log.nav = std::move(nav);
    }

    if (phases.contains("manipulation")) {
        const json& p = phases["manipulation"];
        ManipPhase manip;
        manip.saliency_pgm = dir / p.value("saliency", "saliency.pgm");
        manip.depth_pgm = dir / p.value("depth", "depth.pgm");
        manip.intrinsics_txt = dir / p.value("intrinsics", "intrinsics.txt");
        require_file(manip.saliency_pgm, "saliency map");
        require_file(manip.depth_pgm, "depth image");
        require_file(manip.intrinsics_txt, "intrinsics");
        const auto odo_path = dir / p.value("odometry", "tcp_odometry.jsonl");
        require_file(odo_path, "tcp odometry");
        manip.odometry = read_odometry_jsonl(odo_path);
        if (manip.odometry.size() < 3)
            throw InputError(odo_path.string() + ": tcp stream needs >= 3 samples");
        const auto masks_path = dir / p.value("masks", "masks.jsonl");
        require_file(masks_path, "masks manifest");
        manip.masks = read_masks_manifest(masks_path);
        for (const auto& m : manip.masks) require_file(dir / m.mask_file, "instance mask");
        if (!p.contains("command_t") || !p["command_t"].is_number())
            throw InputError(manifest_path.string() + ": manipulation needs 'command_t'");
        manip.command_t = p["command_t"].get<double>();
        if (!p.contains("ground_truth_object") || !p["ground_truth_object"].is_number_integer())
            throw InputError(manifest_path.string() + ": manipulation needs 'ground_truth_object'");
        manip.ground_truth_object = p["ground_truth_object"].get<int>();
        if (p.contains("ground_truth_xyz")) {
            const auto& g = p["ground_truth_xyz"];
            if (!g.is_array() || g.size() != 3)
                throw InputError(manifest_path.string() + ": ground_truth_xyz must be [x, y, z]");
            manip.ground_truth_xyz = {{g[0].get<double>(), g[1].get<double>(), g[2].get<double>()}};
        }
        log.manip = std::move(manip);
    }

    if (manifest.contains("annotations") && manifest["annotations"].is_object()) {
        for (const auto& [key, value] : manifest["annotations"].items())
            if (value.is_number()) log.annotations[key] = value.get<double>();
    }

    if (!log.nav && !log.manip)
        throw InputError(manifest_path.string() + ": no phases declared");
    return log;
}

void write_session_manifest(const SessionLog& log, const std::filesystem::path& path) {
    json manifest;
    manifest["version"] = 1;
    json phases = json::object();
    if (log.nav) {
        json p;
        p["odometry"] = "base_odometry.jsonl";
        p["grid"] = log.nav->grid_pgm.filename().string();
        p["grid_meta"] = log.nav->grid_meta.filename().string();
        p["contact_t"] = log.nav->contact_t;
        json region = json::array();
        for (const auto& [x, y] : log.nav->ground_truth_region.vertices)
            region.push_back({x, y});
        p["ground_truth_region"] = region;
        phases["navigation"] = p;
    }
    if (log.manip) {
        json p;
        p["odometry"] = "tcp_odometry.jsonl";
        p["saliency"] = log.manip->saliency_pgm.filename().string();
        p["depth"] = log.manip->depth_pgm.filename().string();
        p["intrinsics"] = log.manip->intrinsics_txt.filename().string();
        p["masks"] = "masks.jsonl";
        p["command_t"] = log.manip->command_t;
        p["ground_truth_object"] = log.manip->ground_truth_object;
        if (log.manip->ground_truth_xyz) {
            const auto& g = *log.manip->ground_truth_xyz;
            p["ground_truth_xyz"] = {g[0], g[1], g[2]};
        }
        phases["manipulation"] = p;
    }
    manifest["phases"] = phases;
    if (!log.annotations.empty()) {
        json ann = json::object();
        for (const auto& [key, value] : log.annotations) ann[key] = value;
        manifest["annotations"] = ann;
    }

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace guider::replay
