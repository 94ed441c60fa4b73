#include "guider/io/ply_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace guider::io {

PlyCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());

    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
        throw IoError("not a PLY file: " + path.string());

    long vertex_count = -1;
    int property_count = 0;
    bool ascii = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = (fmt == "ascii");
        } else if (word == "element") {
            std::string kind;
            ls >> kind >> vertex_count;
            if (kind != "vertex") throw IoError("unsupported PLY element: " + kind);
        } else if (word == "property") {
            ++property_count;
        } else if (word == "end_header") {
            break;
        }
    }
    if (!ascii) throw IoError("only ASCII PLY supported: " + path.string());
    if (vertex_count < 0) throw IoError("PLY missing vertex element: " + path.string());
    if (property_count != 3 && property_count != 6)
        throw IoError("PLY must carry x y z [nx ny nz]: " + path.string());

    PlyCloud out;
    out.cloud.points.reserve(vertex_count);
    const bool with_normals = (property_count == 6);
    if (with_normals) out.normals.emplace();
    for (long i = 0; i < vertex_count; ++i) {
        if (!std::getline(in, line)) throw IoError("truncated PLY: " + path.string());
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z)) throw IoError("bad PLY vertex line: " + path.string());
        out.cloud.points.emplace_back(x, y, z);
        if (with_normals) {
            double nx, ny, nz;
            if (!(ls >> nx >> ny >> nz)) throw IoError("bad PLY normal: " + path.string());
            out.normals->emplace_back(nx, ny, nz);
        }
    }
    return out;
}

void write_ply(const geom::PointCloud& cloud,
               const std::vector<Eigen::Vector3d>* normals,
               const std::filesystem::path& path) {
    if (normals != nullptr && normals->size() != cloud.size())
        throw InputError("write_ply: normals do not match cloud");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (normals != nullptr)
        out << "property double nx\nproperty double ny\nproperty double nz\n";
    out << "end_header\n";

    char buf[192];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        if (normals != nullptr) {
            const auto& n = (*normals)[i];
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g\n",
                          p.x(), p.y(), p.z(), n.x(), n.y(), n.z());
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        }
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace guider::io
