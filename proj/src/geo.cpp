#include "banfusion/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <tuple>

namespace banfusion {

namespace {

constexpr double kEarthRadiusM = 6'371'000.0;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

void check_coordinate(double lat_deg, double lon_deg) {
    if (lat_deg < -90.0 || lat_deg > 90.0 || lon_deg < -180.0 || lon_deg > 180.0) {
        throw Error(Errc::out_of_range_coordinate,
                    "(" + std::to_string(lat_deg) + ", " + std::to_string(lon_deg) + ")");
    }
}

// Nearest fix to t within tol, or nullptr. Fixes are sorted by ts.
const GpsFix* nearest_fix(const std::vector<GpsFix>& fixes, TimestampMs t, DurationMs tol_ms) {
    auto it = std::lower_bound(fixes.begin(), fixes.end(), t,
                               [](const GpsFix& f, TimestampMs v) { return f.ts < v; });
    const GpsFix* best = nullptr;
    DurationMs best_gap = tol_ms + 1;
    if (it != fixes.end() && std::llabs(it->ts - t) < best_gap) {
        best = &*it;
        best_gap = std::llabs(it->ts - t);
    }
    if (it != fixes.begin()) {
        const GpsFix* prev = &*std::prev(it);
        if (std::llabs(prev->ts - t) < best_gap) best = prev;
    }
    return best;
}

struct SliceGroup {
    std::set<std::string> subjects;
    std::vector<const GpsFix*> fixes;
};

struct OpenEvent {
    std::set<std::string> subjects;
    TimestampMs start = 0;
    TimestampMs last_seen = 0;
    std::vector<GpsFix> fixes;
};

ColocationEvent close_event(const OpenEvent& open, DurationMs slice_ms) {
    ColocationEvent ev;
    ev.subject_ids = open.subjects;
    ev.start_ts = open.start;
    ev.end_ts = open.last_seen + slice_ms;
    double lat_sum = 0, lon_sum = 0;
    for (const auto& f : open.fixes) {
        lat_sum += f.lat_deg;
        lon_sum += f.lon_deg;
    }
    const auto n = static_cast<double>(open.fixes.size());
    ev.centroid_lat_deg = lat_sum / n;
    ev.centroid_lon_deg = lon_sum / n;
    for (std::size_t i = 0; i < open.fixes.size(); ++i) {
        for (std::size_t j = i + 1; j < open.fixes.size(); ++j) {
            ev.max_spread_m = std::max(
                ev.max_spread_m, haversine_m(open.fixes[i].lat_deg, open.fixes[i].lon_deg,
                                             open.fixes[j].lat_deg, open.fixes[j].lon_deg));
        }
    }
    return ev;
}

} // namespace

double haversine_m(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
    check_coordinate(lat1_deg, lon1_deg);
    check_coordinate(lat2_deg, lon2_deg);
    const double phi1 = deg2rad(lat1_deg);
    const double phi2 = deg2rad(lat2_deg);
    const double dphi = deg2rad(lat2_deg - lat1_deg);
    const double dlambda = deg2rad(lon2_deg - lon1_deg);
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) *
                         std::sin(dlambda / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<ColocationEvent> detect_colocation(
    const std::map<std::string, std::vector<GpsFix>>& fixes_by_subject,
    const ColocationParams& params) {
    TimestampMs t_min = 0, t_max = 0;
    bool any = false;
    for (const auto& [subject, fixes] : fixes_by_subject) {
        for (std::size_t i = 1; i < fixes.size(); ++i) {
            if (fixes[i].ts < fixes[i - 1].ts) {
                throw Error(Errc::unsorted_fixes, "fixes of '" + subject + "' not sorted");
            }
        }
        if (fixes.empty()) continue;
        if (!any) {
            t_min = fixes.front().ts;
            t_max = fixes.back().ts;
            any = true;
        } else {
            t_min = std::min(t_min, fixes.front().ts);
            t_max = std::max(t_max, fixes.back().ts);
        }
    }
    std::vector<ColocationEvent> events;
    if (!any || fixes_by_subject.size() < 2) return events;

    const auto tol_ms = static_cast<DurationMs>(std::llround(params.time_tol_s * 1000.0));
    std::vector<OpenEvent> open;

    for (TimestampMs t = t_min; t <= t_max; t += params.slice_ms) {
        // fixes available at this slice
        std::vector<std::pair<std::string, const GpsFix*>> present;
        for (const auto& [subject, fixes] : fixes_by_subject) {
            if (const GpsFix* f = nearest_fix(fixes, t, tol_ms)) present.emplace_back(subject, f);
        }
        if (present.size() < 2) continue;

        // pairwise rule, lifted to groups via connected components
        std::vector<std::size_t> component(present.size());
        for (std::size_t i = 0; i < present.size(); ++i) component[i] = i;
        std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
            while (component[x] != x) x = component[x] = component[component[x]];
            return x;
        };
        for (std::size_t i = 0; i < present.size(); ++i) {
            for (std::size_t j = i + 1; j < present.size(); ++j) {
                const GpsFix* a = present[i].second;
                const GpsFix* b = present[j].second;
                const double limit = params.dist_tol_m + a->accuracy_m + b->accuracy_m;
                if (haversine_m(a->lat_deg, a->lon_deg, b->lat_deg, b->lon_deg) <= limit) {
                    component[root(i)] = root(j);
                }
            }
        }
        std::map<std::size_t, SliceGroup> groups;
        for (std::size_t i = 0; i < present.size(); ++i) {
            SliceGroup& g = groups[root(i)];
            g.subjects.insert(present[i].first);
            g.fixes.push_back(present[i].second);
        }

        for (auto& [_, group] : groups) {
            if (group.subjects.size() < 2) continue;
            bool matched = false;
            for (auto& ev : open) {
                if (ev.subjects == group.subjects &&
                    t - ev.last_seen < params.merge_gap_ms + params.slice_ms) {
                    ev.last_seen = t;
                    for (const GpsFix* f : group.fixes) ev.fixes.push_back(*f);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                OpenEvent ev;
                ev.subjects = group.subjects;
                ev.start = t;
                ev.last_seen = t;
                for (const GpsFix* f : group.fixes) ev.fixes.push_back(*f);
                open.push_back(std::move(ev));
            }
        }

        // close events that have been silent past the merge gap
        for (auto it = open.begin(); it != open.end();) {
            if (t - it->last_seen >= params.merge_gap_ms + params.slice_ms) {
                events.push_back(close_event(*it, params.slice_ms));
                it = open.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (const auto& ev : open) events.push_back(close_event(ev, params.slice_ms));

    std::sort(events.begin(), events.end(), [](const ColocationEvent& a, const ColocationEvent& b) {
        return std::tie(a.start_ts, a.end_ts) < std::tie(b.start_ts, b.end_ts);
    });
    return events;
}

std::vector<MovementInterval> detect_movement(const std::vector<GpsFix>& fixes,
                                              const MovementParams& params) {
    for (std::size_t i = 1; i < fixes.size(); ++i) {
        if (fixes[i].ts < fixes[i - 1].ts) throw Error(Errc::unsorted_fixes, "fixes not sorted");
    }
    std::vector<MovementInterval> intervals;
    if (fixes.size() < 2 || !(params.window_s > 0)) return intervals;

    const auto window_ms = static_cast<DurationMs>(std::llround(params.window_s * 1000.0));
    const TimestampMs t0 = fixes.front().ts;
    const TimestampMs t_end = fixes.back().ts;

    struct Window {
        std::size_t first, last; // fix indices
        bool moving;
    };
    std::vector<Window> windows;
    std::size_t cursor = 0;
    for (TimestampMs start = t0; start <= t_end; start += window_ms) {
        while (cursor < fixes.size() && fixes[cursor].ts < start) ++cursor;
        std::size_t hi = cursor;
        std::vector<double> accuracies;
        while (hi < fixes.size() && fixes[hi].ts < start + window_ms) {
            accuracies.push_back(fixes[hi].accuracy_m);
            ++hi;
        }
        if (hi - cursor < 2) continue;

        const GpsFix& first = fixes[cursor];
        const GpsFix& last = fixes[hi - 1];
        const double duration_s = static_cast<double>(last.ts - first.ts) / 1000.0;
        if (duration_s <= 0) continue;
        const double displacement =
            haversine_m(first.lat_deg, first.lon_deg, last.lat_deg, last.lon_deg);

        std::nth_element(accuracies.begin(), accuracies.begin() + accuracies.size() / 2,
                         accuracies.end());
        const double median_accuracy = accuracies[accuracies.size() / 2];

        const bool moving = displacement / duration_s >= params.speed_threshold_mps &&
                            displacement > 2.0 * median_accuracy;
        windows.push_back({cursor, hi - 1, moving});
    }

    // merge adjacent moving windows
    std::size_t i = 0;
    while (i < windows.size()) {
        if (!windows[i].moving) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < windows.size() && windows[j + 1].moving) ++j;
        const GpsFix& first = fixes[windows[i].first];
        const GpsFix& last = fixes[windows[j].last];
        MovementInterval interval;
        interval.device_id = first.device_id;
        interval.start_ts = first.ts;
        interval.end_ts = last.ts;
        interval.displacement_m =
            haversine_m(first.lat_deg, first.lon_deg, last.lat_deg, last.lon_deg);
        interval.mean_speed_mps =
            interval.displacement_m / (static_cast<double>(last.ts - first.ts) / 1000.0);
        intervals.push_back(interval);
        i = j + 1;
    }
    return intervals;
}

std::string geojson_export(const std::map<std::string, std::vector<GpsFix>>& fixes_by_subject,
                           const std::vector<ColocationEvent>& events) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& [subject, fixes] : fixes_by_subject) {
        for (const auto& f : fixes) {
            features.push_back({
                {"type", "Feature"},
                {"geometry",
                 {{"type", "Point"}, {"coordinates", {f.lon_deg, f.lat_deg}}}},
                {"properties",
                 {{"kind", "fix"},
                  {"device_id", subject},
                  {"ts", f.ts},
                  {"accuracy_m", f.accuracy_m}}},
            });
        }
    }
    for (const auto& ev : events) {
        features.push_back({
            {"type", "Feature"},
            {"geometry",
             {{"type", "Point"}, {"coordinates", {ev.centroid_lon_deg, ev.centroid_lat_deg}}}},
            {"properties",
             {{"kind", "colocation_centroid"},
              {"subject_ids", ev.subject_ids},
              {"start_ts", ev.start_ts},
              {"end_ts", ev.end_ts},
              {"max_spread_m", ev.max_spread_m}}},
        });
    }
    nlohmann::json collection = {{"type", "FeatureCollection"}, {"features", features}};
    return collection.dump();
}

std::string movement_csv(const std::vector<MovementInterval>& intervals) {
    std::ostringstream out;
    out << "device_id,start,end,displacement_m,mean_speed_mps\n";
    char buf[96];
    for (const auto& m : intervals) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.4f", m.displacement_m, m.mean_speed_mps);
        out << m.device_id << ',' << m.start_ts << ',' << m.end_ts << ',' << buf << '\n';
    }
    return out.str();
}

} // namespace banfusion
