// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/cloud_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "pickpoint/error.hpp"

namespace pickpoint {

namespace {

[[noreturn]] void parse_error(size_t line, const std::string& detail) {
    throw Error("parse error at line " + std::to_string(line) + ": " + detail);
}

std::vector<char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return bytes;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

// Pulls one header line out of the byte buffer, tolerating \r\n endings.
bool next_line(const std::vector<char>& bytes, size_t& pos, std::string& line) {
    if (pos >= bytes.size()) return false;
    size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    line.assign(bytes.begin() + pos, bytes.begin() + end);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = (end < bytes.size()) ? end + 1 : end;
    return true;
}

enum class ScalarType { I8, U8, I16, U16, I32, U32, F32, F64 };

size_t scalar_size(ScalarType t) {
    switch (t) {
        case ScalarType::I8:
        case ScalarType::U8: return 1;
        case ScalarType::I16:
        case ScalarType::U16: return 2;
        case ScalarType::I32:
        case ScalarType::U32:
        case ScalarType::F32: return 4;
        case ScalarType::F64: return 8;
    }
    return 0;
}

std::optional<ScalarType> scalar_from_name(const std::string& name) {
    if (name == "char" || name == "int8") return ScalarType::I8;
    if (name == "uchar" || name == "uint8") return ScalarType::U8;
    if (name == "short" || name == "int16") return ScalarType::I16;
    if (name == "ushort" || name == "uint16") return ScalarType::U16;
    if (name == "int" || name == "int32") return ScalarType::I32;
    if (name == "uint" || name == "uint32") return ScalarType::U32;
    if (name == "float" || name == "float32") return ScalarType::F32;
    if (name == "double" || name == "float64") return ScalarType::F64;
    return std::nullopt;
}

bool is_integer_type(ScalarType t) { return t != ScalarType::F32 && t != ScalarType::F64; }

uint16_t load_le16(const char* p) {
    return static_cast<uint16_t>(static_cast<uint8_t>(p[0])) |
           static_cast<uint16_t>(static_cast<uint8_t>(p[1])) << 8;
}

uint32_t load_le32(const char* p) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(p[i]);
    return v;
}

uint64_t load_le64(const char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(p[i]);
    return v;
}

double read_scalar_le(const char* p, ScalarType t) {
    switch (t) {
        case ScalarType::I8: return static_cast<int8_t>(p[0]);
        case ScalarType::U8: return static_cast<uint8_t>(p[0]);
        case ScalarType::I16: return static_cast<int16_t>(load_le16(p));
        case ScalarType::U16: return load_le16(p);
        case ScalarType::I32: return static_cast<int32_t>(load_le32(p));
        case ScalarType::U32: return load_le32(p);
        case ScalarType::F32: return std::bit_cast<float>(load_le32(p));
        case ScalarType::F64: return std::bit_cast<double>(load_le64(p));
    }
    return 0.0;
}

double parse_ascii_scalar(const std::string& tok, size_t line) {
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || p != end) parse_error(line, "bad number '" + tok + "'");
    return v;
}

// float32-typed properties must round through float, not double, so an
// ascii file re-reads to exactly the stored float32 value.
double parse_ascii_typed(const std::string& tok, ScalarType type, size_t line) {
    if (type == ScalarType::F32) {
        float v = 0.0f;
        const char* end = tok.data() + tok.size();
        auto [p, ec] = std::from_chars(tok.data(), end, v);
        if (ec != std::errc() || p != end) parse_error(line, "bad number '" + tok + "'");
        return static_cast<double>(v);
    }
    return parse_ascii_scalar(tok, line);
}

uint8_t clamp_channel(double v) {
    const double r = std::nearbyint(v);
    if (r < 0.0) return 0;
    if (r > 255.0) return 255;
    return static_cast<uint8_t>(r);
}

struct PlyProperty {
    std::string name;
    ScalarType type = ScalarType::F32;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> properties;
    bool has_list = false;
};

struct PlyHeader {
    bool binary = false;
    std::vector<PlyElement> elements;
    size_t data_start = 0;   // byte offset just past end_header
    size_t header_lines = 0;
};

PlyHeader parse_ply_header(const std::vector<char>& bytes) {
    PlyHeader h;
    size_t pos = 0;
    size_t line_no = 0;
    std::string line;

    if (!next_line(bytes, pos, line)) parse_error(1, "empty file");
    ++line_no;
    if (line != "ply") parse_error(line_no, "expected 'ply' magic");

    if (!next_line(bytes, pos, line)) parse_error(line_no + 1, "missing format line");
    ++line_no;
    auto fmt = split_tokens(line);
    if (fmt.size() != 3 || fmt[0] != "format") parse_error(line_no, "bad format line");
    if (fmt[1] == "ascii") {
        h.binary = false;
    } else if (fmt[1] == "binary_little_endian") {
        h.binary = true;
    } else {
        parse_error(line_no, "unsupported format '" + fmt[1] + "'");
    }

    bool ended = false;
    while (next_line(bytes, pos, line)) {
        ++line_no;
        auto toks = split_tokens(line);
        if (toks.empty() || toks[0] == "comment" || toks[0] == "obj_info") continue;
        if (toks[0] == "end_header") {
            ended = true;
            break;
        }
        if (toks[0] == "element") {
            if (toks.size() != 3) parse_error(line_no, "bad element line");
            PlyElement e;
            e.name = toks[1];
            try {
                e.count = std::stoull(toks[2]);
            } catch (const std::exception&) {
                parse_error(line_no, "bad element count");
            }
            h.elements.push_back(std::move(e));
        } else if (toks[0] == "property") {
            if (h.elements.empty()) parse_error(line_no, "property before element");
            if (toks.size() >= 2 && toks[1] == "list") {
                h.elements.back().has_list = true;
                continue;
            }
            if (toks.size() != 3) parse_error(line_no, "bad property line");
            auto st = scalar_from_name(toks[1]);
            if (!st) throw Error("unsupported property type '" + toks[1] + "'");
            h.elements.back().properties.push_back({toks[2], *st});
        } else {
            parse_error(line_no, "unexpected header keyword '" + toks[0] + "'");
        }
    }
    if (!ended) parse_error(line_no, "missing end_header");
    h.data_start = pos;
    h.header_lines = line_no;
    return h;
}

struct VertexLayout {
    int ix = -1, iy = -1, iz = -1;
    int ir = -1, ig = -1, ib = -1;
    bool has_color() const { return ir >= 0 && ig >= 0 && ib >= 0; }
};

VertexLayout resolve_vertex_layout(const PlyElement& vertex) {
    VertexLayout lay;
    for (int i = 0; i < static_cast<int>(vertex.properties.size()); ++i) {
        const auto& p = vertex.properties[i];
        if (p.name == "x") lay.ix = i;
        else if (p.name == "y") lay.iy = i;
        else if (p.name == "z") lay.iz = i;
        else if (p.name == "red") lay.ir = i;
        else if (p.name == "green") lay.ig = i;
        else if (p.name == "blue") lay.ib = i;
    }
    if (lay.ix < 0 || lay.iy < 0 || lay.iz < 0) {
        throw Error("vertex element lacks x/y/z properties");
    }
    for (int ci : {lay.ir, lay.ig, lay.ib}) {
        if (ci >= 0 && !is_integer_type(vertex.properties[ci].type)) {
            throw Error("unsupported property type for color channel");
        }
    }
    return lay;
}

void check_finite(double x, double y, double z, size_t vertex_index) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        throw Error("non-finite coordinate at vertex " + std::to_string(vertex_index));
    }
}

ColoredPointCloud read_ply(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    const PlyHeader h = parse_ply_header(bytes);

    ColoredPointCloud cloud;
    size_t pos = h.data_start;
    size_t line_no = h.header_lines;
    bool color_warned = false;

    for (size_t ei = 0; ei < h.elements.size(); ++ei) {
        const PlyElement& elem = h.elements[ei];
        if (elem.name != "vertex") {
            if (elem.count == 0) continue;
            if (!h.binary) {
                // Non-vertex ascii elements occupy one line each; skip them.
                std::string line;
                for (size_t i = 0; i < elem.count; ++i) {
                    if (!next_line(bytes, pos, line)) parse_error(line_no + 1, "unexpected end of file");
                    ++line_no;
                }
                continue;
            }
            if (elem.has_list) {
                // Variable-length rows cannot be skipped in binary data; if a
                // vertex element still follows we cannot locate it.
                const bool vertex_later = std::any_of(
                    h.elements.begin() + ei + 1, h.elements.end(),
                    [](const PlyElement& e) { return e.name == "vertex"; });
                if (vertex_later) throw Error("unsupported property: binary list element precedes vertex data");
                break;
            }
            size_t row = 0;
            for (const auto& p : elem.properties) row += scalar_size(p.type);
            pos += row * elem.count;
            continue;
        }

        if (elem.has_list) throw Error("unsupported property: list property in vertex element");
        const VertexLayout lay = resolve_vertex_layout(elem);
        if (!lay.has_color() && elem.count > 0 && !color_warned) {
            log_warning(path.string() + ": no color properties, defaulting to white");
            color_warned = true;
        }
        cloud.points.reserve(cloud.points.size() + elem.count);

        if (h.binary) {
            size_t row = 0;
            std::vector<size_t> offsets;
            for (const auto& p : elem.properties) {
                offsets.push_back(row);
                row += scalar_size(p.type);
            }
            if (pos + row * elem.count > bytes.size()) {
                throw Error("unexpected end of file in " + path.string());
            }
            for (size_t i = 0; i < elem.count; ++i) {
                const char* base = bytes.data() + pos + i * row;
                auto fetch = [&](int idx) {
                    return read_scalar_le(base + offsets[idx], elem.properties[idx].type);
                };
                ColoredPoint pt;
                pt.x = fetch(lay.ix);
                pt.y = fetch(lay.iy);
                pt.z = fetch(lay.iz);
                check_finite(pt.x, pt.y, pt.z, i);
                if (lay.has_color()) {
                    pt.r = clamp_channel(fetch(lay.ir));
                    pt.g = clamp_channel(fetch(lay.ig));
                    pt.b = clamp_channel(fetch(lay.ib));
                }
                cloud.points.push_back(pt);
            }
            pos += row * elem.count;
        } else {
            std::string line;
            for (size_t i = 0; i < elem.count; ++i) {
                if (!next_line(bytes, pos, line)) parse_error(line_no + 1, "unexpected end of file");
                ++line_no;
                auto toks = split_tokens(line);
                if (toks.size() != elem.properties.size()) {
                    parse_error(line_no, "expected " + std::to_string(elem.properties.size()) +
                                             " values, got " + std::to_string(toks.size()));
                }
                auto fetch = [&](int idx) {
                    return parse_ascii_typed(toks[static_cast<size_t>(idx)],
                                             elem.properties[static_cast<size_t>(idx)].type,
                                             line_no);
                };
                ColoredPoint pt;
                pt.x = fetch(lay.ix);
                pt.y = fetch(lay.iy);
                pt.z = fetch(lay.iz);
                check_finite(pt.x, pt.y, pt.z, i);
                if (lay.has_color()) {
                    pt.r = clamp_channel(fetch(lay.ir));
                    pt.g = clamp_channel(fetch(lay.ig));
                    pt.b = clamp_channel(fetch(lay.ib));
                }
                cloud.points.push_back(pt);
            }
        }
    }
    return cloud;
}

ColoredPointCloud read_pcd(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    size_t pos = 0;
    size_t line_no = 0;
    std::string line;

    std::vector<std::string> fields;
    std::vector<size_t> sizes;
    std::vector<char> types;
    std::vector<int> counts;
    size_t points = 0;
    bool have_points = false;
    std::string data_mode;

    while (next_line(bytes, pos, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '#') continue;
        auto toks = split_tokens(line);
        if (toks.empty()) continue;
        const std::string& key = toks[0];
        if (key == "VERSION" || key == "WIDTH" || key == "HEIGHT" || key == "VIEWPOINT") {
            continue;
        } else if (key == "FIELDS") {
            fields.assign(toks.begin() + 1, toks.end());
        } else if (key == "SIZE") {
            for (size_t i = 1; i < toks.size(); ++i) sizes.push_back(std::stoull(toks[i]));
        } else if (key == "TYPE") {
            for (size_t i = 1; i < toks.size(); ++i) types.push_back(toks[i][0]);
        } else if (key == "COUNT") {
            for (size_t i = 1; i < toks.size(); ++i) counts.push_back(std::stoi(toks[i]));
        } else if (key == "POINTS") {
            if (toks.size() != 2) parse_error(line_no, "bad POINTS line");
            points = std::stoull(toks[1]);
            have_points = true;
        } else if (key == "DATA") {
            if (toks.size() != 2) parse_error(line_no, "bad DATA line");
            data_mode = toks[1];
            break;
        } else {
            parse_error(line_no, "unexpected header keyword '" + key + "'");
        }
    }
    if (data_mode.empty()) parse_error(line_no, "missing DATA line");
    if (data_mode != "ascii" && data_mode != "binary") {
        parse_error(line_no, "unsupported DATA mode '" + data_mode + "'");
    }
    if (fields.empty() || sizes.size() != fields.size() || types.size() != fields.size()) {
        parse_error(line_no, "inconsistent FIELDS/SIZE/TYPE");
    }
    if (counts.empty()) counts.assign(fields.size(), 1);
    for (int c : counts) {
        if (c != 1) throw Error("unsupported property: COUNT != 1");
    }
    if (!have_points) parse_error(line_no, "missing POINTS");

    int fx = -1, fy = -1, fz = -1, frgb = -1;
    for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        if (fields[i] == "x") fx = i;
        else if (fields[i] == "y") fy = i;
        else if (fields[i] == "z") fz = i;
        else if (fields[i] == "rgb") frgb = i;
    }
    if (fx < 0 || fy < 0 || fz < 0) throw Error("PCD lacks x/y/z fields");

    ColoredPointCloud cloud;
    cloud.points.reserve(points);
    if (frgb < 0 && points > 0) {
        log_warning(path.string() + ": no rgb field, defaulting to white");
    }

    auto decode_rgb = [](uint32_t packed, ColoredPoint& pt) {
        pt.r = static_cast<uint8_t>((packed >> 16) & 0xff);
        pt.g = static_cast<uint8_t>((packed >> 8) & 0xff);
        pt.b = static_cast<uint8_t>(packed & 0xff);
    };

    if (data_mode == "ascii") {
        for (size_t i = 0; i < points; ++i) {
            if (!next_line(bytes, pos, line)) parse_error(line_no + 1, "unexpected end of file");
            ++line_no;
            auto toks = split_tokens(line);
            if (toks.size() != fields.size()) parse_error(line_no, "field count mismatch");
            auto coord_type = [&](int i) {
                return (types[static_cast<size_t>(i)] == 'F' && sizes[static_cast<size_t>(i)] == 4)
                           ? ScalarType::F32
                           : ScalarType::F64;
            };
            ColoredPoint pt;
            pt.x = parse_ascii_typed(toks[static_cast<size_t>(fx)], coord_type(fx), line_no);
            pt.y = parse_ascii_typed(toks[static_cast<size_t>(fy)], coord_type(fy), line_no);
            pt.z = parse_ascii_typed(toks[static_cast<size_t>(fz)], coord_type(fz), line_no);
            check_finite(pt.x, pt.y, pt.z, i);
            if (frgb >= 0) {
                if (types[frgb] == 'U' || types[frgb] == 'I') {
                    decode_rgb(static_cast<uint32_t>(std::stoull(toks[frgb])), pt);
                } else {
                    const float f = std::strtof(toks[frgb].c_str(), nullptr);
                    decode_rgb(std::bit_cast<uint32_t>(f), pt);
                }
            }
            cloud.points.push_back(pt);
        }
    } else {
        size_t row = 0;
        std::vector<size_t> offsets;
        for (size_t i = 0; i < fields.size(); ++i) {
            offsets.push_back(row);
            row += sizes[i];
        }
        if (pos + row * points > bytes.size()) {
            throw Error("unexpected end of file in " + path.string());
        }
        auto field_type = [&](int i) -> ScalarType {
            const char t = types[i];
            const size_t s = sizes[i];
            if (t == 'F' && s == 4) return ScalarType::F32;
            if (t == 'F' && s == 8) return ScalarType::F64;
            if (t == 'U' && s == 4) return ScalarType::U32;
            if (t == 'U' && s == 1) return ScalarType::U8;
            if (t == 'U' && s == 2) return ScalarType::U16;
            if (t == 'I' && s == 4) return ScalarType::I32;
            if (t == 'I' && s == 1) return ScalarType::I8;
            if (t == 'I' && s == 2) return ScalarType::I16;
            throw Error("unsupported property type in PCD");
        };
        for (size_t i = 0; i < points; ++i) {
            const char* base = bytes.data() + pos + i * row;
            ColoredPoint pt;
            pt.x = read_scalar_le(base + offsets[fx], field_type(fx));
            pt.y = read_scalar_le(base + offsets[fy], field_type(fy));
            pt.z = read_scalar_le(base + offsets[fz], field_type(fz));
            check_finite(pt.x, pt.y, pt.z, i);
            if (frgb >= 0) {
                uint32_t packed;
                if (types[frgb] == 'F') {
                    packed = load_le32(base + offsets[frgb]);
                } else {
                    packed = static_cast<uint32_t>(read_scalar_le(base + offsets[frgb], field_type(frgb)));
                }
                decode_rgb(packed, pt);
            }
            cloud.points.push_back(pt);
        }
    }
    return cloud;
}

void store_le32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::string ply_header(size_t count, bool binary) {
    std::string h = "ply\n";
    h += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
    h += "comment written by pickpoint\n";
    h += "element vertex " + std::to_string(count) + "\n";
    h += "property float x\nproperty float y\nproperty float z\n";
    h += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    h += "end_header\n";
    return h;
}

std::string format_float(float v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

}  // namespace

ColoredPointCloud read_cloud(const std::filesystem::path& path, CloudFormat format) {
    switch (format) {
        case CloudFormat::Ply: return read_ply(path);
        case CloudFormat::Pcd: return read_pcd(path);
    }
    throw Error("unknown cloud format");
}

ColoredPointCloud read_cloud(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".ply") return read_ply(path);
    if (ext == ".pcd") return read_pcd(path);
    throw Error("cannot infer cloud format from extension '" + ext + "'");
}

void write_cloud(const ColoredPointCloud& cloud, const std::filesystem::path& path,
                 CloudWriteFormat format) {
    std::string out = ply_header(cloud.size(), format == CloudWriteFormat::PlyBinaryLe);
    if (format == CloudWriteFormat::PlyAscii) {
        for (const auto& p : cloud.points) {
            out += format_float(static_cast<float>(p.x)) + " " +
                   format_float(static_cast<float>(p.y)) + " " +
                   format_float(static_cast<float>(p.z)) + " " + std::to_string(p.r) + " " +
                   std::to_string(p.g) + " " + std::to_string(p.b) + "\n";
        }
    } else {
        out.reserve(out.size() + cloud.size() * 15);
        for (const auto& p : cloud.points) {
            store_le32(out, std::bit_cast<uint32_t>(static_cast<float>(p.x)));
            store_le32(out, std::bit_cast<uint32_t>(static_cast<float>(p.y)));
            store_le32(out, std::bit_cast<uint32_t>(static_cast<float>(p.z)));
            out.push_back(static_cast<char>(p.r));
            out.push_back(static_cast<char>(p.g));
            out.push_back(static_cast<char>(p.b));
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("write failed for " + path.string());
}

}  // namespace pickpoint
