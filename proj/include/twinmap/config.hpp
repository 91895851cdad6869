#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinmap/format.hpp"
#include "twinmap/geometry.hpp"

namespace twinmap {

/// Plain "key = value" configuration. Keys may repeat (e.g. several crop
/// boxes); '#' starts a comment line.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text) {
        KeyValueConfig cfg;
        const auto lines = split_lines(text);
        for (std::size_t n = 0; n < lines.size(); ++n) {
            const auto line = trim(lines[n]);
            if (line.empty() || line.front() == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ParseError("config line " + std::to_string(n + 1) + ": expected 'key = value'");
            }
            const auto key = trim(line.substr(0, eq));
            if (key.empty()) throw ParseError("config line " + std::to_string(n + 1) + ": empty key");
            cfg.entries_[std::string(key)].push_back(std::string(trim(line.substr(eq + 1))));
        }
        return cfg;
    }

    bool has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

    /// Last value given for `key`.
    std::optional<std::string> get(std::string_view key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second.back();
    }

    std::vector<std::string> get_all(std::string_view key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return {};
        return it->second;
    }

    std::optional<double> get_double(std::string_view key) const {
        const auto v = get(key);
        if (!v) return std::nullopt;
        const auto x = parse_number<double>(*v);
        if (!x || !std::isfinite(*x)) throw ParseError("config key '" + std::string(key) + "' is not a number");
        return x;
    }

    std::optional<std::size_t> get_count(std::string_view key) const {
        const auto v = get(key);
        if (!v) return std::nullopt;
        const auto x = parse_number<std::size_t>(*v);
        if (!x) throw ParseError("config key '" + std::string(key) + "' is not a non-negative integer");
        return x;
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        for (const auto &[k, v] : entries_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

/// Exactly `count` whitespace-separated finite numbers.
inline std::vector<double> parse_numbers(std::string_view text, std::size_t count, std::string_view what) {
    const auto words = split_words(text);
    if (words.size() != count) {
        throw ParseError(std::string(what) + ": expected " + std::to_string(count) + " numbers, got " +
                         std::to_string(words.size()));
    }
    std::vector<double> out;
    for (const auto &w : words) {
        const auto v = parse_number<double>(w);
        if (!v || !std::isfinite(*v)) throw ParseError(std::string(what) + ": malformed number '" + std::string(w) + "'");
        out.push_back(*v);
    }
    return out;
}

inline RigidTransform parse_transform(std::string_view text) {
    // Drop comment lines before counting numbers.
    std::string body;
    for (const auto line : split_lines(text)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        body += std::string(t) + "\n";
    }
    const auto v = parse_numbers(body, 12, "transform");
    try {
        return RigidTransform::from_row_major(std::span<const double, 12>(v.data(), 12));
    } catch (const InvalidArgument &e) {
        throw ParseError(std::string("transform: ") + e.what());
    }
}

/// Three rows of R followed by the translation, one row per line.
inline std::string format_transform(const RigidTransform &t) {
    const auto v = t.to_row_major();
    std::string out;
    for (int row = 0; row < 4; ++row) {
        out += format_double(v[3 * row]) + " " + format_double(v[3 * row + 1]) + " " + format_double(v[3 * row + 2]) + "\n";
    }
    return out;
}

inline Aabb parse_box(std::string_view text) {
    const auto v = parse_numbers(text, 6, "crop box");
    try {
        return {Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
    } catch (const InvalidArgument &e) {
        throw ParseError(std::string("crop box: ") + e.what());
    }
}

}  // namespace twinmap
