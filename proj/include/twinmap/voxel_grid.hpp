#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twinmap/format.hpp"
#include "twinmap/point_cloud.hpp"

namespace twinmap {

/// Dense occupancy grid in binvox v1 storage order: x slowest, then z, then
/// y fastest, i.e. linear index = x*dy*dz + z*dy + y.
class VoxelGrid {
public:
    using Dims = std::array<std::size_t, 3>;

    VoxelGrid(Dims dims, std::vector<std::uint8_t> occupancy, Vec3 translate = Vec3::Zero(),
              double scale = 1.0)
        : dims_(dims), occupancy_(std::move(occupancy)), translate_(translate), scale_(scale) {
        if (dims_[0] < 1 || dims_[1] < 1 || dims_[2] < 1) {
            throw InvalidArgument("voxel grid dimensions must be >= 1");
        }
        if (occupancy_.size() != cell_count()) {
            throw InvalidArgument("occupancy length does not match grid dimensions");
        }
        if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw InvalidArgument("voxel grid scale must be > 0");
        if (!all_finite(translate_)) throw InvalidArgument("voxel grid translate must be finite");
        for (auto &v : occupancy_) v = v ? 1 : 0;
    }

    /// All-empty grid.
    explicit VoxelGrid(Dims dims, Vec3 translate = Vec3::Zero(), double scale = 1.0)
        : VoxelGrid(dims, std::vector<std::uint8_t>(checked_count(dims), 0), translate, scale) {}

    const Dims &dims() const { return dims_; }
    const Vec3 &translate() const { return translate_; }
    double scale() const { return scale_; }
    std::span<const std::uint8_t> occupancy() const { return occupancy_; }

    std::size_t cell_count() const { return dims_[0] * dims_[1] * dims_[2]; }
    std::size_t max_dim() const { return std::max({dims_[0], dims_[1], dims_[2]}); }

    std::size_t linear_index(std::size_t x, std::size_t y, std::size_t z) const {
        return x * dims_[1] * dims_[2] + z * dims_[1] + y;
    }

    bool occupied(std::size_t x, std::size_t y, std::size_t z) const {
        return occupancy_[linear_index(x, y, z)] != 0;
    }

    void set(std::size_t x, std::size_t y, std::size_t z, bool value) {
        occupancy_[linear_index(x, y, z)] = value ? 1 : 0;
    }

    std::size_t occupied_count() const {
        return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), std::uint8_t{1}));
    }

    friend bool operator==(const VoxelGrid &a, const VoxelGrid &b) {
        return a.dims_ == b.dims_ && a.occupancy_ == b.occupancy_ && a.translate_ == b.translate_ &&
               a.scale_ == b.scale_;
    }

private:
    static std::size_t checked_count(const Dims &d) { return d[0] * d[1] * d[2]; }

    Dims dims_;
    std::vector<std::uint8_t> occupancy_;
    Vec3 translate_;
    double scale_;
};

enum class VoxelCoordinates { normalized, world };

namespace detail {

struct ByteReader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    bool at_end() const { return pos >= bytes.size(); }

    std::string_view next_line() {
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        std::size_t stop = pos;
        if (pos < bytes.size()) ++pos;  // consume '\n'
        if (stop > start && bytes[stop - 1] == '\r') --stop;
        return {reinterpret_cast<const char *>(bytes.data()) + start, stop - start};
    }
};

}  // namespace detail

/// Decodes a binvox v1 file. Missing translate/scale lines default to
/// (0,0,0) and 1.
inline VoxelGrid parse_binvox(std::span<const std::uint8_t> bytes) {
    detail::ByteReader reader{bytes};
    const auto magic = split_words(reader.next_line());
    if (magic.size() != 2 || magic[0] != "#binvox") throw ParseError("malformed binvox header: missing '#binvox' line");
    if (magic[1] != "1") throw ParseError("unsupported binvox version '" + std::string(magic[1]) + "'");

    std::optional<VoxelGrid::Dims> dims;
    Vec3 translate = Vec3::Zero();
    double scale = 1.0;
    bool saw_data = false;
    while (!reader.at_end()) {
        const auto words = split_words(reader.next_line());
        if (words.empty()) continue;
        if (words[0] == "data" && words.size() == 1) {
            saw_data = true;
            break;
        }
        if (words[0] == "dim" && words.size() == 4) {
            VoxelGrid::Dims d{};
            for (int i = 0; i < 3; ++i) {
                const auto v = parse_number<std::size_t>(words[i + 1]);
                if (!v || *v == 0) throw ParseError("malformed binvox header: bad dim value");
                d[i] = *v;
            }
            dims = d;
        } else if (words[0] == "translate" && words.size() == 4) {
            for (int i = 0; i < 3; ++i) {
                const auto v = parse_number<double>(words[i + 1]);
                if (!v || !std::isfinite(*v)) throw ParseError("malformed binvox header: bad translate value");
                translate[i] = *v;
            }
        } else if (words[0] == "scale" && words.size() == 2) {
            const auto v = parse_number<double>(words[1]);
            if (!v || !(*v > 0.0) || !std::isfinite(*v)) throw ParseError("malformed binvox header: bad scale value");
            scale = *v;
        } else {
            throw ParseError("malformed binvox header: unexpected line '" + std::string(words[0]) + "'");
        }
    }
    if (!dims) throw ParseError("malformed binvox header: missing dim line");
    if (!saw_data) throw ParseError("malformed binvox header: missing data line");

    const std::size_t total = (*dims)[0] * (*dims)[1] * (*dims)[2];
    std::vector<std::uint8_t> occupancy;
    occupancy.reserve(total);
    std::size_t pos = reader.pos;
    while (occupancy.size() < total) {
        if (pos + 2 > bytes.size()) throw ParseError("unexpected end of voxel data");
        const std::uint8_t value = bytes[pos];
        const std::uint8_t count = bytes[pos + 1];
        pos += 2;
        if (value > 1) throw ParseError("invalid voxel run value " + std::to_string(value));
        if (count == 0) throw ParseError("voxel run with count 0");
        if (occupancy.size() + count > total) {
            throw ParseError("voxel run counts exceed the declared cell total");
        }
        occupancy.insert(occupancy.end(), count, value);
    }
    if (pos != bytes.size()) throw ParseError("voxel run counts exceed the declared cell total");
    return VoxelGrid(*dims, std::move(occupancy), translate, scale);
}

inline VoxelGrid parse_binvox(std::string_view text) {
    return parse_binvox(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

/// Encodes with maximal runs of at most 255 cells.
inline std::vector<std::uint8_t> write_binvox(const VoxelGrid &grid) {
    const auto &d = grid.dims();
    const Vec3 &t = grid.translate();
    const std::string header = "#binvox 1\ndim " + std::to_string(d[0]) + " " + std::to_string(d[1]) + " " +
                               std::to_string(d[2]) + "\ntranslate " + format_double(t.x()) + " " +
                               format_double(t.y()) + " " + format_double(t.z()) + "\nscale " +
                               format_double(grid.scale()) + "\ndata\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const auto occ = grid.occupancy();
    std::size_t i = 0;
    while (i < occ.size()) {
        const std::uint8_t value = occ[i];
        std::size_t run = 1;
        while (i + run < occ.size() && occ[i + run] == value && run < 255) ++run;
        out.push_back(value);
        out.push_back(static_cast<std::uint8_t>(run));
        i += run;
    }
    return out;
}

/// One point per occupied cell, emitted in storage order. Cell (i,j,k)
/// maps to ((i+0.5)/d, (j+0.5)/d, (k+0.5)/d) with d = max dimension; world
/// mode then scales by `scale` and offsets by `translate`.
inline PointCloud voxel_to_points(const VoxelGrid &grid, VoxelCoordinates mode) {
    const auto &dims = grid.dims();
    const double d = static_cast<double>(grid.max_dim());
    PointCloud cloud;
    cloud.points.reserve(grid.occupied_count());
    for (std::size_t x = 0; x < dims[0]; ++x) {
        for (std::size_t z = 0; z < dims[2]; ++z) {
            for (std::size_t y = 0; y < dims[1]; ++y) {
                if (!grid.occupied(x, y, z)) continue;
                Vec3 p((static_cast<double>(x) + 0.5) / d, (static_cast<double>(y) + 0.5) / d,
                       (static_cast<double>(z) + 0.5) / d);
                if (mode == VoxelCoordinates::world) p = grid.translate() + grid.scale() * p;
                cloud.points.push_back(p);
            }
        }
    }
    return cloud;
}

/// Drops occupied cells whose six face neighbors are all occupied. Cells on
/// the grid border always survive.
inline VoxelGrid surface_cells(const VoxelGrid &grid) {
    const auto &d = grid.dims();
    VoxelGrid out(d, grid.translate(), grid.scale());
    const auto filled = [&](std::size_t x, std::size_t y, std::size_t z, int axis, int step) {
        std::array<std::size_t, 3> c{x, y, z};
        if (step < 0 && c[axis] == 0) return false;
        if (step > 0 && c[axis] + 1 >= d[axis]) return false;
        c[axis] = step < 0 ? c[axis] - 1 : c[axis] + 1;
        return grid.occupied(c[0], c[1], c[2]);
    };
    for (std::size_t x = 0; x < d[0]; ++x) {
        for (std::size_t y = 0; y < d[1]; ++y) {
            for (std::size_t z = 0; z < d[2]; ++z) {
                if (!grid.occupied(x, y, z)) continue;
                bool interior = true;
                for (int axis = 0; axis < 3 && interior; ++axis) {
                    interior = filled(x, y, z, axis, -1) && filled(x, y, z, axis, +1);
                }
                if (!interior) out.set(x, y, z, true);
            }
        }
    }
    return out;
}

}  // namespace twinmap
