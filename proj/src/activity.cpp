#include "banfusion/activity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace banfusion {

namespace {

// Mean of the subject's samples inside [window.start, window.end), with each
// sample attributed to the center of its trailing averaging window.
std::optional<double> subject_mean(const NormalizedHrSeries& series, const TimeWindow& window) {
    const DurationMs shift = static_cast<DurationMs>(series.window_s) * 1000 / 2;
    double sum = 0;
    std::size_t n = 0;
    for (const auto& [ts, value] : series.samples) {
        const TimestampMs attributed = ts - shift;
        if (attributed >= window.start && attributed < window.end) {
            sum += value;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::vector<double> subject_means(const std::map<std::string, NormalizedHrSeries>& series,
                                  const TimeWindow& window) {
    std::vector<double> means;
    means.reserve(series.size());
    for (const auto& [subject, s] : series) {
        auto m = subject_mean(s, window);
        if (!m) {
            throw Error(Errc::missing_subject_coverage,
                        "'" + subject + "' has no samples in the window");
        }
        means.push_back(*m);
    }
    return means;
}

} // namespace

double group_elevation(const std::map<std::string, NormalizedHrSeries>& series,
                       const TimeWindow& window) {
    if (series.empty()) throw Error(Errc::missing_subject_coverage, "no subjects");
    const auto means = subject_means(series, window);
    double sum = 0;
    for (double m : means) sum += m;
    return sum / static_cast<double>(means.size());
}

double inter_subject_dispersion(const std::map<std::string, NormalizedHrSeries>& series,
                                const TimeWindow& window) {
    if (series.size() < 2) {
        throw Error(Errc::fewer_than_two_subjects, "dispersion needs at least 2 subjects");
    }
    const auto means = subject_means(series, window);
    double mean = 0;
    for (double m : means) mean += m;
    mean /= static_cast<double>(means.size());
    double ss = 0;
    for (double m : means) ss += (m - mean) * (m - mean);
    return std::sqrt(ss / static_cast<double>(means.size() - 1));
}

std::vector<ActivitySegment> classify_segments(
    const std::map<std::string, NormalizedHrSeries>& series,
    const std::vector<MovementInterval>& movement, const ActivityParams& params) {
    if (series.size() < 2) {
        throw Error(Errc::fewer_than_two_subjects, "segmentation needs at least 2 subjects");
    }

    // jointly covered timeline, in attributed (window-center) time
    TimestampMs cover_begin = 0, cover_end = 0;
    bool first = true;
    for (const auto& [subject, s] : series) {
        if (s.samples.empty()) {
            throw Error(Errc::insufficient_coverage, "'" + subject + "' has an empty series");
        }
        const DurationMs shift = static_cast<DurationMs>(s.window_s) * 1000 / 2;
        const TimestampMs begin = s.samples.front().first - shift;
        const TimestampMs end = s.samples.back().first - shift;
        if (first) {
            cover_begin = begin;
            cover_end = end;
            first = false;
        } else {
            cover_begin = std::max(cover_begin, begin);
            cover_end = std::min(cover_end, end);
        }
    }
    const auto n_slices = (cover_end - cover_begin) / params.slice_ms;
    if (n_slices < 2) {
        throw Error(Errc::insufficient_coverage, "need at least 2 slices of common coverage");
    }

    std::set<std::string> subjects;
    for (const auto& [subject, _] : series) subjects.insert(subject);
    const std::size_t majority = series.size() / 2 + 1;

    std::vector<ActivitySegment> segments;
    ActivityLabel previous = ActivityLabel::rest;
    for (std::int64_t i = 0; i < n_slices; ++i) {
        TimeWindow slice;
        slice.start = cover_begin + i * params.slice_ms;
        slice.end = slice.start + params.slice_ms;

        const double elevation = group_elevation(series, slice);
        const double dispersion = inter_subject_dispersion(series, slice);

        std::size_t moving_subjects = 0;
        for (const auto& subject : subjects) {
            const bool inside = std::any_of(
                movement.begin(), movement.end(), [&](const MovementInterval& m) {
                    return m.device_id == subject && m.start_ts < slice.end &&
                           m.end_ts > slice.start;
                });
            if (inside) ++moving_subjects;
        }
        const bool majority_moves = moving_subjects >= majority;

        ActivityLabel label;
        if (elevation < params.e_rest_bpm) {
            label = ActivityLabel::rest;
        } else if (elevation >= params.e_act_bpm) {
            label = (dispersion <= params.d_split_bpm || majority_moves)
                        ? ActivityLabel::physical
                        : ActivityLabel::cognitive;
        } else {
            label = previous; // hysteresis band
        }
        previous = label;

        if (!segments.empty() && segments.back().label == label) {
            ActivitySegment& seg = segments.back();
            const double n_prev =
                static_cast<double>((seg.end_ts - seg.start_ts) / params.slice_ms);
            seg.group_elevation_bpm =
                (seg.group_elevation_bpm * n_prev + elevation) / (n_prev + 1);
            seg.dispersion_bpm = (seg.dispersion_bpm * n_prev + dispersion) / (n_prev + 1);
            seg.moving = seg.moving || majority_moves;
            seg.end_ts = slice.end;
        } else {
            ActivitySegment seg;
            seg.start_ts = slice.start;
            seg.end_ts = slice.end;
            seg.label = label;
            seg.group_elevation_bpm = elevation;
            seg.dispersion_bpm = dispersion;
            seg.moving = majority_moves;
            seg.subject_ids = subjects;
            segments.push_back(std::move(seg));
        }
    }
    return segments;
}

std::string segments_csv(const std::vector<ActivitySegment>& segments) {
    std::ostringstream out;
    out << "start,end,label,group_elevation_bpm,dispersion_bpm,moving\n";
    char buf[64];
    for (const auto& s : segments) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f", s.group_elevation_bpm, s.dispersion_bpm);
        out << s.start_ts << ',' << s.end_ts << ',' << activity_label_name(s.label) << ','
            << buf << ',' << (s.moving ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string normalized_hr_csv(const std::vector<NormalizedHrSample>& samples) {
    std::ostringstream out;
    out << "device_id,ts,hr_minus_median_bpm,median_bpm\n";
    char buf[64];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f", s.hr_minus_median_bpm, s.median_bpm);
        out << s.device_id << ',' << s.ts << ',' << buf << '\n';
    }
    return out.str();
}

} // namespace banfusion
