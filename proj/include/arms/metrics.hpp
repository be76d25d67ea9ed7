#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arms/errors.hpp"
#include "arms/types.hpp"

namespace arms {

namespace detail {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wraps into [0, 360).
inline double wrap_deg(double d) {
    d = std::fmod(d, 360.0);
    if (d < 0.0) d += 360.0;
    return d;
}

/// Signed circular distance in (-180, 180].
inline double circular_delta_deg(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

struct MeanVector {
    double c = 0.0;
    double s = 0.0;
    double r() const { return std::hypot(c, s); }
    double angle_deg() const { return wrap_deg(rad2deg(std::atan2(s, c))); }
};

inline MeanVector mean_unit_vector(const std::vector<double>& angles_deg) {
    MeanVector mv;
    for (double a : angles_deg) {
        mv.c += std::cos(deg2rad(a));
        mv.s += std::sin(deg2rad(a));
    }
    mv.c /= static_cast<double>(angles_deg.size());
    mv.s /= static_cast<double>(angles_deg.size());
    return mv;
}

inline double circular_std_from_r(double r_bar) {
    if (r_bar <= 1e-12) return 360.0; // defined maximum for uniform dispersion
    if (r_bar >= 1.0) return 0.0;
    return rad2deg(std::sqrt(-2.0 * std::log(r_bar)));
}

} // namespace detail

/// Circular standard deviation sqrt(-2 ln R) of a set of angles, in degrees.
/// Returns 0 when all angles are equal and the defined maximum of 360 when
/// the mean resultant vanishes (uniform symmetry).
inline double circular_std(const std::vector<double>& angles_deg) {
    if (angles_deg.empty()) throw ArgumentError("circular_std of an empty set");
    return detail::circular_std_from_r(detail::mean_unit_vector(angles_deg).r());
}

inline double circular_mean_deg(const std::vector<double>& angles_deg) {
    if (angles_deg.empty()) throw ArgumentError("circular mean of an empty set");
    return detail::mean_unit_vector(angles_deg).angle_deg();
}

struct DirectionMode {
    double angle_deg = 0.0;     // circular mean of the assigned angles
    double circular_std_deg = 0.0;
    std::size_t count = 0;
};

struct DirectionStats {
    double mean_angle_deg = 0.0;
    double circular_std_deg = 0.0;
    std::size_t mode_count = 0;
    std::vector<DirectionMode> per_mode;

    /// Event-count-weighted mean of the per-mode circular stds — the
    /// headline dispersion number for multi-modal direction fields.
    double pooled_mode_std_deg() const {
        double mass = 0.0, acc = 0.0;
        for (const auto& m : per_mode) {
            acc += static_cast<double>(m.count) * m.circular_std_deg;
            mass += static_cast<double>(m.count);
        }
        return mass > 0.0 ? acc / mass : 0.0;
    }
};

/// Histograms the angles, finds modes as local maxima holding more than 5%
/// of the total mass, assigns every angle to its nearest mode and reports
/// per-mode dispersion. A plateau of equal bins flanked by smaller ones
/// counts as one mode; if nothing clears the floor the global maximum bin
/// becomes the single mode so every angle always has a home.
inline DirectionStats direction_modes(const std::vector<double>& angles_deg,
                                      double bin_width_deg = 5.0) {
    if (angles_deg.empty()) throw ArgumentError("direction_modes of an empty set");
    if (!(bin_width_deg > 0.0)) throw ConfigError("bin width must be positive");
    const double bins_exact = 360.0 / bin_width_deg;
    const int nbins = static_cast<int>(std::lround(bins_exact));
    if (nbins < 1 || std::abs(bins_exact - nbins) > 1e-9)
        throw ConfigError("bin width must divide 360 degrees");

    std::vector<std::size_t> hist(nbins, 0);
    for (double a : angles_deg) {
        int b = static_cast<int>(detail::wrap_deg(a) / bin_width_deg);
        if (b >= nbins) b = nbins - 1;
        ++hist[b];
    }

    const double floor = 0.05 * static_cast<double>(angles_deg.size());
    std::vector<double> mode_centers;

    // Scan maximal circular runs of equal-count bins; a run strictly above
    // both flanking counts and above the mass floor is one mode.
    for (int b = 0; b < nbins; ++b) {
        const std::size_t h = hist[b];
        if (h == 0 || static_cast<double>(h) <= floor) continue;
        const int prev = (b + nbins - 1) % nbins;
        if (hist[prev] == h) continue; // not the start of a run
        int len = 1;
        while (len < nbins && hist[(b + len) % nbins] == h) ++len;
        if (len == nbins) { // perfectly flat histogram
            mode_centers.push_back((b + 0.5) * bin_width_deg);
            break;
        }
        if (hist[prev] < h && hist[(b + len) % nbins] < h) {
            const double center_bin = b + (len - 1) / 2.0;
            mode_centers.push_back(detail::wrap_deg((center_bin + 0.5) * bin_width_deg));
        }
    }

    if (mode_centers.empty()) {
        const int best = static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());
        mode_centers.push_back((best + 0.5) * bin_width_deg);
    }

    std::vector<std::vector<double>> members(mode_centers.size());
    for (double a : angles_deg) {
        std::size_t nearest = 0;
        double best = 1e300;
        for (std::size_t m = 0; m < mode_centers.size(); ++m) {
            const double d = std::abs(detail::circular_delta_deg(a, mode_centers[m]));
            if (d < best) {
                best = d;
                nearest = m;
            }
        }
        members[nearest].push_back(a);
    }

    DirectionStats stats;
    stats.mean_angle_deg = circular_mean_deg(angles_deg);
    stats.circular_std_deg = circular_std(angles_deg);
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (members[m].empty()) continue;
        DirectionMode mode;
        mode.angle_deg = circular_mean_deg(members[m]);
        mode.circular_std_deg = circular_std(members[m]);
        mode.count = members[m].size();
        stats.per_mode.push_back(mode);
    }
    stats.mode_count = stats.per_mode.size();
    return stats;
}

inline std::vector<double> flow_directions_deg(const std::vector<TrueFlowResult>& results) {
    std::vector<double> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(detail::wrap_deg(detail::rad2deg(std::atan2(r.vy, r.vx))));
    return out;
}

inline std::vector<double> flow_directions_deg(const std::vector<LocalFlowEvent>& events) {
    std::vector<double> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back(detail::wrap_deg(detail::rad2deg(std::atan2(e.vy, e.vx))));
    return out;
}

/// Largest number of events any sliding [t - tau, t] window holds; this is
/// the ring-buffer length a dataset demands. Two-cursor scan over the
/// time-ordered stream.
inline std::size_t required_buffer_length(const std::vector<LocalFlowEvent>& events,
                                          std::int64_t tau_us) {
    if (tau_us <= 0) throw ArgumentError("tau must be positive");
    std::size_t best = 0;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0 && events[i].t < events[i - 1].t)
            throw ParseError("required_buffer_length: events unordered at index " +
                             std::to_string(i));
        while (events[lo].t < events[i].t - tau_us) ++lo;
        best = std::max(best, i - lo + 1);
    }
    return best;
}

/// A timestamped scalar sample.
struct Sample {
    std::int64_t t_us = 0;
    double value = 0.0;
};

namespace detail {

inline std::vector<std::optional<double>> mean_resample(const std::vector<Sample>& series,
                                                        std::int64_t t0, std::int64_t step,
                                                        std::size_t ncells) {
    std::vector<double> acc(ncells, 0.0);
    std::vector<std::size_t> cnt(ncells, 0);
    for (const auto& s : series) {
        if (s.t_us < t0) continue;
        const std::size_t cell = static_cast<std::size_t>((s.t_us - t0) / step);
        if (cell >= ncells) continue;
        acc[cell] += s.value;
        ++cnt[cell];
    }
    std::vector<std::optional<double>> out(ncells);
    for (std::size_t i = 0; i < ncells; ++i)
        if (cnt[i] > 0) out[i] = acc[i] / static_cast<double>(cnt[i]);
    return out;
}

} // namespace detail

/// Pearson correlation of two timestamped series after mean-resampling both
/// onto a shared grid over their temporal overlap. Grid cells missing a
/// sample on either side are dropped pairwise.
inline double pearson_correlation(const std::vector<Sample>& series_a,
                                  const std::vector<Sample>& series_b,
                                  std::int64_t resample_us = 10000) {
    if (series_a.empty() || series_b.empty())
        throw ArgumentError("pearson_correlation needs two non-empty series");
    if (resample_us <= 0) throw ArgumentError("resample step must be positive");

    auto span = [](const std::vector<Sample>& s) {
        std::int64_t lo = s.front().t_us, hi = s.front().t_us;
        for (const auto& x : s) {
            lo = std::min(lo, x.t_us);
            hi = std::max(hi, x.t_us);
        }
        return std::pair<std::int64_t, std::int64_t>{lo, hi};
    };
    const auto [a_lo, a_hi] = span(series_a);
    const auto [b_lo, b_hi] = span(series_b);
    const std::int64_t t0 = std::max(a_lo, b_lo);
    const std::int64_t t1 = std::min(a_hi, b_hi);
    if (t1 < t0) throw ArgumentError("series do not overlap in time");

    const std::size_t ncells = static_cast<std::size_t>((t1 - t0) / resample_us) + 1;
    const auto ra = detail::mean_resample(series_a, t0, resample_us, ncells);
    const auto rb = detail::mean_resample(series_b, t0, resample_us, ncells);

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ncells; ++i) {
        if (ra[i] && rb[i]) {
            xs.push_back(*ra[i]);
            ys.push_back(*rb[i]);
        }
    }
    if (xs.size() < 2) throw ArgumentError("fewer than two paired resampled cells");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ZeroVarianceError("correlation undefined: a series has zero variance");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

/// Demand vs supply of true-flow computation for one dataset.
struct RateReport {
    double true_flow_rate = 0.0; // events per second the dataset demands
    double compute_rate = 0.0;   // events per second the engine supplies
    bool realtime = false;       // strictly compute_rate > true_flow_rate
};

inline RateReport realtime_check(std::size_t flow_event_count, std::int64_t duration_us,
                                 double engine_rate_evt_s) {
    if (duration_us <= 0) throw ArgumentError("realtime_check needs a positive duration");
    RateReport report;
    report.true_flow_rate = static_cast<double>(flow_event_count) / (duration_us * 1e-6);
    report.compute_rate = engine_rate_evt_s;
    report.realtime = report.compute_rate > report.true_flow_rate;
    return report;
}

/// Direct form for pre-computed rate pairs.
inline RateReport realtime_check_rates(double true_flow_rate_evt_s, double engine_rate_evt_s) {
    RateReport report;
    report.true_flow_rate = true_flow_rate_evt_s;
    report.compute_rate = engine_rate_evt_s;
    report.realtime = report.compute_rate > report.true_flow_rate;
    return report;
}

} // namespace arms
