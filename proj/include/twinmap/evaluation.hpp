#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "twinmap/format.hpp"
#include "twinmap/spatial_index.hpp"

namespace twinmap {

struct Correspondence {
    std::size_t map_index = 0;
    std::size_t model_index = 0;
    double distance = 0.0;  // meters

    friend bool operator==(const Correspondence &, const Correspondence &) = default;
};

/// Map points paired with their closest model point, outliers beyond
/// `threshold` removed. Pairs are ordered by map index.
struct CorrespondenceSet {
    std::vector<Correspondence> pairs;
    double threshold = 1.0;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

inline CorrespondenceSet correspondences(const PointCloud &map_cloud, const SpatialIndex &model_index,
                                         double threshold) {
    if (!(threshold > 0.0)) throw InvalidArgument("correspondence threshold must be > 0");
    if (model_index.size() == 0) throw InvalidArgument("correspondences: empty model index");
    CorrespondenceSet set;
    set.threshold = threshold;
    for (std::size_t i = 0; i < map_cloud.size(); ++i) {
        const Neighbor nn = model_index.nearest(map_cloud.points[i]);
        if (nn.distance <= threshold) set.pairs.push_back({i, nn.index, nn.distance});
    }
    return set;
}

struct ErrorStats {
    double mean = 0.0;     // meters
    double std_dev = 0.0;  // population standard deviation, meters
    std::size_t count = 0;
};

inline ErrorStats error_stats(const CorrespondenceSet &corr) {
    if (corr.empty()) throw InvalidArgument("error_stats: empty correspondence set");
    const double n = static_cast<double>(corr.size());
    double sum = 0.0;
    for (const auto &c : corr.pairs) sum += c.distance;
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto &c : corr.pairs) sq += (c.distance - mean) * (c.distance - mean);
    return {mean, std::sqrt(sq / n), corr.size()};
}

struct HistogramBin {
    double lower = 0.0;  // meters
    std::size_t count = 0;

    friend bool operator==(const HistogramBin &, const HistogramBin &) = default;
};

inline std::size_t histogram_bin_count(double threshold, double bin_width) {
    // 1e-9 slack so that e.g. 1.0 / 0.05 yields 20 bins, not 21.
    const double bins = std::ceil(threshold / bin_width - 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(bins));
}

/// Bins of width `bin_width` covering [0, threshold]; a distance equal to
/// the threshold lands in the last bin.
inline std::vector<HistogramBin> histogram(const CorrespondenceSet &corr, double bin_width) {
    if (!(bin_width > 0.0)) throw InvalidArgument("histogram bin width must be > 0");
    const std::size_t n = histogram_bin_count(corr.threshold, bin_width);
    std::vector<HistogramBin> bins(n);
    for (std::size_t i = 0; i < n; ++i) bins[i].lower = static_cast<double>(i) * bin_width;
    for (const auto &c : corr.pairs) {
        auto b = static_cast<std::size_t>(std::floor(c.distance / bin_width));
        bins[std::min(b, n - 1)].count += 1;
    }
    return bins;
}

/// Summary of one map-vs-model comparison. Mean and standard deviation are
/// NaN when no map point found a model point within the threshold.
struct EvaluationReport {
    std::size_t map_point_count = 0;
    std::size_t correspondence_count = 0;
    double mean_error = std::numeric_limits<double>::quiet_NaN();
    double std_dev = std::numeric_limits<double>::quiet_NaN();
    double threshold = 1.0;
    double bin_width = 0.05;
    std::vector<HistogramBin> histogram;
};

inline EvaluationReport evaluate_map(const PointCloud &aligned_map, const SpatialIndex &model_index,
                                     double threshold = 1.0, double bin_width = 0.05) {
    const CorrespondenceSet corr = correspondences(aligned_map, model_index, threshold);
    EvaluationReport report;
    report.map_point_count = aligned_map.size();
    report.correspondence_count = corr.size();
    report.threshold = threshold;
    report.bin_width = bin_width;
    report.histogram = histogram(corr, bin_width);
    if (!corr.empty()) {
        const ErrorStats stats = error_stats(corr);
        report.mean_error = stats.mean;
        report.std_dev = stats.std_dev;
    }
    return report;
}

/// Scalars are written exactly; bin edges are rounded to 12 significant
/// digits so that e.g. 6 * 0.05 prints as 0.3.
inline std::string format_report(const EvaluationReport &r) {
    std::string out = "# twinmap evaluation report\n";
    out += "map_point_count = " + std::to_string(r.map_point_count) + "\n";
    out += "correspondence_count = " + std::to_string(r.correspondence_count) + "\n";
    out += "threshold_m = " + format_double(r.threshold) + "\n";
    out += "bin_width_m = " + format_double(r.bin_width) + "\n";
    out += "mean_error_m = " + format_double(r.mean_error) + "\n";
    out += "std_dev_m = " + format_double(r.std_dev) + "\n";
    out += "\n[histogram]\n";
    out += "# bin_lower_m count\n";
    for (const auto &b : r.histogram) out += format_significant(b.lower, 12) + " " + std::to_string(b.count) + "\n";
    return out;
}

inline std::string format_histogram_csv(const EvaluationReport &r) {
    std::string out = "bin_lower_m,bin_upper_m,count\n";
    for (std::size_t i = 0; i < r.histogram.size(); ++i) {
        const double upper = i + 1 == r.histogram.size() ? r.threshold : r.histogram[i + 1].lower;
        out += format_significant(r.histogram[i].lower, 12) + "," + format_significant(upper, 12) + "," +
               std::to_string(r.histogram[i].count) + "\n";
    }
    return out;
}

inline EvaluationReport parse_report(std::string_view text) {
    EvaluationReport r;
    std::map<std::string, std::string, std::less<>> scalars;
    bool in_histogram = false;
    const auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto line = trim(lines[n]);
        if (line.empty() || line.front() == '#') continue;
        const std::string where = "report line " + std::to_string(n + 1);
        if (line == "[histogram]") {
            in_histogram = true;
            continue;
        }
        if (in_histogram) {
            const auto words = split_words(line);
            const auto lower = words.size() == 2 ? parse_number<double>(words[0]) : std::nullopt;
            const auto count = words.size() == 2 ? parse_number<std::size_t>(words[1]) : std::nullopt;
            if (!lower || !count) throw ParseError(where + ": malformed histogram row");
            r.histogram.push_back({*lower, *count});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
        scalars[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    const auto get = [&](std::string_view key) -> const std::string & {
        const auto it = scalars.find(key);
        if (it == scalars.end()) throw ParseError("report is missing '" + std::string(key) + "'");
        return it->second;
    };
    const auto get_count = [&](std::string_view key) {
        const auto v = parse_number<std::size_t>(get(key));
        if (!v) throw ParseError("report field '" + std::string(key) + "' is not a count");
        return *v;
    };
    const auto get_real = [&](std::string_view key) {
        const auto &s = get(key);
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        const auto v = parse_number<double>(s);
        if (!v) throw ParseError("report field '" + std::string(key) + "' is not a number");
        return *v;
    };
    r.map_point_count = get_count("map_point_count");
    r.correspondence_count = get_count("correspondence_count");
    r.threshold = get_real("threshold_m");
    r.bin_width = get_real("bin_width_m");
    r.mean_error = get_real("mean_error_m");
    r.std_dev = get_real("std_dev_m");
    return r;
}

/// Relative difference of two positive quantities against each base.
struct RelativeDifference {
    double a = 0.0;
    double b = 0.0;
    double percent_of_smaller = 0.0;  // |a-b| / min(a,b) * 100
    double percent_of_larger = 0.0;   // |a-b| / max(a,b) * 100
};

inline RelativeDifference relative_difference(double a, double b) {
    RelativeDifference d{a, b, 0.0, 0.0};
    const double diff = std::abs(a - b);
    const double lo = std::min(a, b), hi = std::max(a, b);
    d.percent_of_smaller = diff == 0.0 ? 0.0 : diff / lo * 100.0;
    d.percent_of_larger = diff == 0.0 ? 0.0 : diff / hi * 100.0;
    return d;
}

struct ComparisonSummary {
    double mean_delta = 0.0;     // |mean_a - mean_b|, meters
    double std_dev_delta = 0.0;  // |std_a - std_b|, meters
    RelativeDifference std_dev;
    RelativeDifference variance;
    RelativeDifference map_points;
    RelativeDifference correspondences;
};

inline ComparisonSummary compare_reports(const EvaluationReport &a, const EvaluationReport &b) {
    if (a.threshold != b.threshold) throw InvalidArgument("compare_reports: reports use different thresholds");
    if (a.bin_width != b.bin_width) throw InvalidArgument("compare_reports: reports use different bin widths");
    ComparisonSummary s;
    s.mean_delta = std::abs(a.mean_error - b.mean_error);
    s.std_dev_delta = std::abs(a.std_dev - b.std_dev);
    s.std_dev = relative_difference(a.std_dev, b.std_dev);
    s.variance = relative_difference(a.std_dev * a.std_dev, b.std_dev * b.std_dev);
    s.map_points = relative_difference(static_cast<double>(a.map_point_count), static_cast<double>(b.map_point_count));
    s.correspondences = relative_difference(static_cast<double>(a.correspondence_count),
                                            static_cast<double>(b.correspondence_count));
    return s;
}

inline std::string format_comparison(const ComparisonSummary &s) {
    const auto rel = [](std::string_view name, const RelativeDifference &d) {
        const std::string key(name);
        return key + "_a = " + format_double(d.a) + "\n" + key + "_b = " + format_double(d.b) + "\n" + key +
               "_diff_pct_of_smaller = " + format_fixed(d.percent_of_smaller, 1) + "\n" + key +
               "_diff_pct_of_larger = " + format_fixed(d.percent_of_larger, 1) + "\n";
    };
    std::string out = "# twinmap report comparison\n";
    out += "mean_delta_m = " + format_fixed(s.mean_delta, 4) + "\n";
    out += "std_dev_delta_m = " + format_fixed(s.std_dev_delta, 4) + "\n";
    out += rel("std_dev", s.std_dev);
    out += rel("variance", s.variance);
    out += rel("map_points", s.map_points);
    out += rel("correspondences", s.correspondences);
    return out;
}

}  // namespace twinmap
