#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <bit>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "twinmap/format.hpp"
#include "twinmap/point_cloud.hpp"

namespace twinmap {

enum class PlyEncoding { ascii, binary_little_endian };
enum class PlyPrecision { float32, float64 };

struct PlyWriteOptions {
    PlyEncoding encoding = PlyEncoding::binary_little_endian;
    PlyPrecision precision = PlyPrecision::float64;
};

namespace ply_detail {

enum class Scalar { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

inline std::optional<Scalar> scalar_from_name(std::string_view n) {
    if (n == "char" || n == "int8") return Scalar::int8;
    if (n == "uchar" || n == "uint8") return Scalar::uint8;
    if (n == "short" || n == "int16") return Scalar::int16;
    if (n == "ushort" || n == "uint16") return Scalar::uint16;
    if (n == "int" || n == "int32") return Scalar::int32;
    if (n == "uint" || n == "uint32") return Scalar::uint32;
    if (n == "float" || n == "float32") return Scalar::float32;
    if (n == "double" || n == "float64") return Scalar::float64;
    return std::nullopt;
}

inline std::size_t scalar_size(Scalar s) {
    switch (s) {
        case Scalar::int8:
        case Scalar::uint8: return 1;
        case Scalar::int16:
        case Scalar::uint16: return 2;
        case Scalar::int32:
        case Scalar::uint32:
        case Scalar::float32: return 4;
        case Scalar::float64: return 8;
    }
    return 0;
}

struct Property {
    std::string name;
    Scalar type = Scalar::float32;
    bool is_list = false;
    Scalar count_type = Scalar::uint8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

template <typename T>
T load_le(const std::uint8_t *p) {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    T v;
    std::memcpy(&v, raw.data(), sizeof(T));
    return v;
}

template <typename T>
void store_le(std::vector<std::uint8_t> &out, T v) {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    out.insert(out.end(), raw.begin(), raw.end());
}

struct BinaryCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    double read(Scalar s) {
        const std::size_t n = scalar_size(s);
        if (pos + n > bytes.size()) throw ParseError("PLY body ends before all vertices were read");
        const std::uint8_t *p = bytes.data() + pos;
        pos += n;
        switch (s) {
            case Scalar::int8: return static_cast<std::int8_t>(*p);
            case Scalar::uint8: return *p;
            case Scalar::int16: return load_le<std::int16_t>(p);
            case Scalar::uint16: return load_le<std::uint16_t>(p);
            case Scalar::int32: return load_le<std::int32_t>(p);
            case Scalar::uint32: return load_le<std::uint32_t>(p);
            case Scalar::float32: return load_le<float>(p);
            case Scalar::float64: return load_le<double>(p);
        }
        return 0.0;
    }
};

struct VertexLayout {
    std::array<int, 3> xyz{-1, -1, -1};
    std::array<int, 3> rgb{-1, -1, -1};
};

inline VertexLayout vertex_layout(const Element &vertex) {
    VertexLayout layout;
    for (int i = 0; i < static_cast<int>(vertex.properties.size()); ++i) {
        const auto &p = vertex.properties[i];
        if (p.is_list) continue;
        if (p.name == "x") layout.xyz[0] = i;
        if (p.name == "y") layout.xyz[1] = i;
        if (p.name == "z") layout.xyz[2] = i;
        if (p.type == Scalar::uint8) {
            if (p.name == "red" || p.name == "diffuse_red") layout.rgb[0] = i;
            if (p.name == "green" || p.name == "diffuse_green") layout.rgb[1] = i;
            if (p.name == "blue" || p.name == "diffuse_blue") layout.rgb[2] = i;
        }
    }
    for (int axis = 0; axis < 3; ++axis) {
        if (layout.xyz[axis] < 0) {
            throw ParseError(std::string("PLY vertex element lacks the '") + "xyz"[axis] + "' property");
        }
    }
    return layout;
}

inline void finish_vertex(PointCloud &cloud, const std::vector<double> &values, const VertexLayout &layout,
                          bool with_color) {
    const Vec3 p(values[layout.xyz[0]], values[layout.xyz[1]], values[layout.xyz[2]]);
    if (!all_finite(p)) throw ParseError("PLY vertex " + std::to_string(cloud.size()) + " has a non-finite coordinate");
    cloud.points.push_back(p);
    if (with_color) {
        cloud.colors.push_back({static_cast<std::uint8_t>(values[layout.rgb[0]]),
                                static_cast<std::uint8_t>(values[layout.rgb[1]]),
                                static_cast<std::uint8_t>(values[layout.rgb[2]])});
    }
}

}  // namespace ply_detail

/// Reads the "vertex" element of an ASCII or binary little-endian PLY file.
inline PointCloud parse_ply(std::span<const std::uint8_t> bytes) {
    using namespace ply_detail;
    const std::string_view text(reinterpret_cast<const char *>(bytes.data()), bytes.size());
    std::size_t pos = 0;
    const auto next_line = [&]() -> std::string_view {
        if (pos >= text.size()) throw ParseError("PLY header is not terminated by end_header");
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = std::min(end + 1, text.size());
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    };

    if (trim(next_line()) != "ply") throw ParseError("not a PLY file (missing 'ply' magic)");
    std::optional<PlyEncoding> encoding;
    std::vector<Element> elements;
    for (;;) {
        const auto words = split_words(next_line());
        if (words.empty()) continue;
        if (words[0] == "end_header") break;
        if (words[0] == "comment" || words[0] == "obj_info") continue;
        if (words[0] == "format") {
            if (words.size() != 3) throw ParseError("malformed PLY format line");
            if (words[1] == "ascii") {
                encoding = PlyEncoding::ascii;
            } else if (words[1] == "binary_little_endian") {
                encoding = PlyEncoding::binary_little_endian;
            } else {
                throw ParseError("unsupported PLY encoding '" + std::string(words[1]) + "'");
            }
        } else if (words[0] == "element") {
            if (words.size() != 3) throw ParseError("malformed PLY element line");
            const auto count = parse_number<std::size_t>(words[2]);
            if (!count) throw ParseError("malformed PLY element count");
            elements.push_back({std::string(words[1]), *count, {}});
        } else if (words[0] == "property") {
            if (elements.empty()) throw ParseError("PLY property declared before any element");
            Property prop;
            if (words.size() == 5 && words[1] == "list") {
                const auto ct = scalar_from_name(words[2]);
                const auto it = scalar_from_name(words[3]);
                if (!ct || !it) throw ParseError("unknown PLY list property type");
                prop = {std::string(words[4]), *it, true, *ct};
            } else if (words.size() == 3) {
                const auto t = scalar_from_name(words[1]);
                if (!t) throw ParseError("unknown PLY property type '" + std::string(words[1]) + "'");
                prop = {std::string(words[2]), *t, false, Scalar::uint8};
            } else {
                throw ParseError("malformed PLY property line");
            }
            elements.back().properties.push_back(prop);
        } else {
            throw ParseError("unexpected PLY header line '" + std::string(words[0]) + "'");
        }
    }
    if (!encoding) throw ParseError("PLY header lacks a format line");

    const auto vertex_it =
        std::find_if(elements.begin(), elements.end(), [](const Element &e) { return e.name == "vertex"; });
    if (vertex_it == elements.end()) throw ParseError("PLY file has no vertex element");
    const VertexLayout layout = vertex_layout(*vertex_it);
    const bool with_color = layout.rgb[0] >= 0 && layout.rgb[1] >= 0 && layout.rgb[2] >= 0;

    PointCloud cloud;
    cloud.points.reserve(vertex_it->count);
    std::vector<double> values;

    if (*encoding == PlyEncoding::ascii) {
        const auto lines = split_lines(text.substr(pos));
        std::size_t line_no = 0;
        const auto next_data_line = [&]() {
            while (line_no < lines.size() && trim(lines[line_no]).empty()) ++line_no;
            if (line_no >= lines.size()) throw ParseError("PLY body ends before all vertices were read");
            return split_words(lines[line_no++]);
        };
        for (auto e = elements.begin(); e != elements.end(); ++e) {
            for (std::size_t n = 0; n < e->count; ++n) {
                const auto words = next_data_line();
                if (e != vertex_it) continue;
                values.clear();
                std::size_t w = 0;
                for (const auto &prop : e->properties) {
                    std::size_t items = 1;
                    if (prop.is_list) {
                        const auto c = w < words.size() ? parse_number<std::size_t>(words[w]) : std::nullopt;
                        if (!c) throw ParseError("malformed PLY list count");
                        ++w;
                        items = *c;
                    }
                    for (std::size_t k = 0; k < items; ++k, ++w) {
                        if (w >= words.size()) throw ParseError("PLY vertex line has too few values");
                        // Declared float values round through float, as a binary file would.
                        std::optional<double> v;
                        if (prop.type == Scalar::float32 && !prop.is_list) {
                            if (const auto f = parse_number<float>(words[w])) v = *f;
                        } else {
                            v = parse_number<double>(words[w]);
                        }
                        if (!v) throw ParseError("malformed PLY value '" + std::string(words[w]) + "'");
                        if (!prop.is_list) values.push_back(*v);
                    }
                    if (prop.is_list) values.push_back(0.0);
                }
                finish_vertex(cloud, values, layout, with_color);
            }
            if (e == vertex_it) break;
        }
    } else {
        BinaryCursor cursor{bytes, pos};
        for (auto e = elements.begin(); e != elements.end(); ++e) {
            for (std::size_t n = 0; n < e->count; ++n) {
                values.clear();
                for (const auto &prop : e->properties) {
                    if (prop.is_list) {
                        const auto c = static_cast<std::size_t>(cursor.read(prop.count_type));
                        for (std::size_t k = 0; k < c; ++k) cursor.read(prop.type);
                        values.push_back(0.0);
                    } else {
                        values.push_back(cursor.read(prop.type));
                    }
                }
                if (e == vertex_it) finish_vertex(cloud, values, layout, with_color);
            }
            if (e == vertex_it) break;
        }
    }
    return cloud;
}

inline std::vector<std::uint8_t> write_ply(const PointCloud &cloud, const PlyWriteOptions &opts = {}) {
    using namespace ply_detail;
    cloud.validate();
    const bool f64 = opts.precision == PlyPrecision::float64;
    const char *type = f64 ? "double" : "float";
    std::string header = "ply\nformat ";
    header += opts.encoding == PlyEncoding::ascii ? "ascii 1.0\n" : "binary_little_endian 1.0\n";
    header += "element vertex " + std::to_string(cloud.size()) + "\n";
    for (const char *axis : {"x", "y", "z"}) header += std::string("property ") + type + " " + axis + "\n";
    if (cloud.has_colors()) header += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    header += "end_header\n";

    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (opts.encoding == PlyEncoding::ascii) {
        std::string body;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const auto &p = cloud.points[i];
            for (int a = 0; a < 3; ++a) {
                if (a) body += ' ';
                if (f64) {
                    body += format_double(p[a]);
                } else {
                    char buf[32];
                    const auto res = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(p[a]));
                    body.append(buf, res.ptr);
                }
            }
            if (cloud.has_colors()) {
                for (auto c : cloud.colors[i]) body += " " + std::to_string(c);
            }
            body += '\n';
        }
        out.insert(out.end(), body.begin(), body.end());
    } else {
        out.reserve(out.size() + cloud.size() * (f64 ? 24 : 12) + (cloud.has_colors() ? cloud.size() * 3 : 0));
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const auto &p = cloud.points[i];
            for (int a = 0; a < 3; ++a) {
                if (f64) {
                    store_le<double>(out, p[a]);
                } else {
                    store_le<float>(out, static_cast<float>(p[a]));
                }
            }
            if (cloud.has_colors()) out.insert(out.end(), cloud.colors[i].begin(), cloud.colors[i].end());
        }
    }
    return out;
}

/// Whitespace-separated text, one point per line; columns beyond the third
/// are ignored, blank lines and '#' comments skipped.
inline PointCloud parse_xyz(std::string_view text) {
    PointCloud cloud;
    const auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto line = trim(lines[n]);
        if (line.empty() || line.front() == '#') continue;
        const auto words = split_words(line);
        if (words.size() < 3) throw ParseError("XYZ line " + std::to_string(n + 1) + ": expected 3 coordinates");
        Vec3 p;
        for (int a = 0; a < 3; ++a) {
            const auto v = parse_number<double>(words[a]);
            if (!v) throw ParseError("XYZ line " + std::to_string(n + 1) + ": malformed number");
            p[a] = *v;
        }
        if (!all_finite(p)) throw ParseError("XYZ line " + std::to_string(n + 1) + ": non-finite coordinate");
        cloud.points.push_back(p);
    }
    return cloud;
}

inline std::string write_xyz(const PointCloud &cloud) {
    cloud.validate();
    std::string out;
    for (const auto &p : cloud.points) {
        out += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z()) + "\n";
    }
    return out;
}

enum class CloudFormat { ply, xyz };

inline CloudFormat cloud_format_for(const std::filesystem::path &path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ply") return CloudFormat::ply;
    if (ext == ".xyz" || ext == ".txt") return CloudFormat::xyz;
    throw ParseError("unknown point cloud format for '" + path.string() + "' (expected .ply, .xyz or .txt)");
}

inline PointCloud load_cloud(const std::filesystem::path &path) {
    const auto format = cloud_format_for(path);
    const auto bytes = read_file_bytes(path);
    if (format == CloudFormat::ply) return parse_ply(bytes);
    return parse_xyz(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

inline void save_cloud(const PointCloud &cloud, const std::filesystem::path &path, const PlyWriteOptions &opts = {}) {
    if (cloud_format_for(path) == CloudFormat::ply) {
        write_file(path, write_ply(cloud, opts));
    } else {
        write_file(path, write_xyz(cloud));
    }
}

}  // namespace twinmap
