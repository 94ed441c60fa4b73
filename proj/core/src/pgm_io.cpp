#include "guider/io/pgm_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace guider::io {

namespace {

// Reads one whitespace/comment-delimited header token.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

struct PgmHeader {
    int width = 0;
    int height = 0;
    long maxval = 0;
};

PgmHeader read_header(std::istream& in, const std::filesystem::path& path) {
    if (next_token(in) != "P5") throw IoError("not a P5 PGM: " + path.string());
    PgmHeader h;
    try {
        h.width = std::stoi(next_token(in));
        h.height = std::stoi(next_token(in));
        h.maxval = std::stol(next_token(in));
    } catch (const std::exception&) {
        throw IoError("bad PGM header: " + path.string());
    }
    if (h.width < 1 || h.height < 1) throw IoError("bad PGM dimensions: " + path.string());
    return h;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return in;
}

} // namespace

Image<std::uint8_t> read_pgm8(const std::filesystem::path& path) {
    auto in = open_in(path);
    const PgmHeader h = read_header(in, path);
    if (h.maxval < 1 || h.maxval > 255) throw IoError("expected 8-bit PGM: " + path.string());
    Image<std::uint8_t> img(h.width, h.height);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.size()))
        throw IoError("truncated PGM: " + path.string());
    return img;
}

void write_pgm8(const Image<std::uint8_t>& img, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Image<std::uint16_t> read_pgm16(const std::filesystem::path& path) {
    auto in = open_in(path);
    const PgmHeader h = read_header(in, path);
    if (h.maxval < 256 || h.maxval > 65535) throw IoError("expected 16-bit PGM: " + path.string());
    Image<std::uint16_t> img(h.width, h.height);
    std::vector<std::uint8_t> raw(img.size() * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw IoError("truncated PGM: " + path.string());
    for (std::size_t i = 0; i < img.size(); ++i)
        img.data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    return img;
}

void write_pgm16(const Image<std::uint16_t>& img, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<std::uint8_t> raw(img.size() * 2);
    for (std::size_t i = 0; i < img.size(); ++i) {
        raw[2 * i] = static_cast<std::uint8_t>(img.data[i] >> 8);
        raw[2 * i + 1] = static_cast<std::uint8_t>(img.data[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void write_ppm(const std::vector<std::uint8_t>& rgb, int width, int height,
               const std::filesystem::path& path) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw InputError("write_ppm: buffer size mismatch");
    auto out = open_out(path);
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void write_field_pgm(const ScalarField& field, const std::filesystem::path& path) {
    Image<std::uint8_t> img(field.width, field.height);
    for (std::size_t i = 0; i < field.data.size(); ++i) {
        const double v = std::clamp(field.data[i], 0.0, 1.0);
        img.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    write_pgm8(img, path);
}

void write_field_f32(const ScalarField& field, const std::filesystem::path& path) {
    auto out = open_out(path);
    std::vector<float> buf(field.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(field.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path.string());
}

ScalarField read_field_f32(const std::filesystem::path& path, int width, int height) {
    auto in = open_in(path);
    ScalarField field(width, height);
    std::vector<float> buf(field.data.size());
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
        throw IoError("truncated f32 dump: " + path.string());
    for (std::size_t i = 0; i < buf.size(); ++i) field.data[i] = buf[i];
    return field;
}

std::map<std::string, std::string> read_keyvalue(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

void write_keyvalue(const std::map<std::string, std::string>& kv,
                    const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace guider::io
