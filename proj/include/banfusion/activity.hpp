/**
 * @file activity.hpp
 * @brief Rule-based segmentation of the merged multi-subject timeline into
 *        physical / cognitive / rest activities.
 *
 * Discriminators, per 60 s slice of the common timeline:
 *   - group elevation: mean over subjects of each subject's mean normalized HR
 *   - inter-subject dispersion: sample std across subjects of those means
 *   - majority movement: strictly more than half the subjects inside a
 *     movement interval
 * Rule table:
 *   rest       when elevation <  e_rest
 *   physical   when elevation >= e_act and (dispersion <= d_split or majority moves)
 *   cognitive  when elevation >= e_act and dispersion > d_split and no majority
 *   otherwise  the previous slice's label (single-slice hysteresis)
 *
 * Normalized-HR samples are trailing-window means, so each sample is
 * attributed to the center of its averaging window when slicing; segment
 * boundaries then track the underlying activity instead of lagging it by half
 * a window.
 */

#pragma once

#include <map>
#include <string>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion {

struct ActivityParams {
    double e_rest_bpm = 3.0;
    double e_act_bpm = 5.0;
    double d_split_bpm = 3.0;
    DurationMs slice_ms = 60'000;
};

struct TimeWindow {
    TimestampMs start = 0;
    TimestampMs end = 0; // exclusive
};

/// Mean over subjects of each subject's mean normalized HR inside the window.
/// Throws missing_subject_coverage when a subject has no samples there.
double group_elevation(const std::map<std::string, NormalizedHrSeries>& series,
                       const TimeWindow& window);

/// Sample standard deviation (N-1) across subjects of per-subject mean
/// normalized HR inside the window. Throws fewer_than_two_subjects /
/// missing_subject_coverage.
double inter_subject_dispersion(const std::map<std::string, NormalizedHrSeries>& series,
                                const TimeWindow& window);

/// Cuts the jointly covered timeline into slices, labels each by the rule
/// table, and merges adjacent same-label slices into segments that tile the
/// analyzed interval. Throws fewer_than_two_subjects / insufficient_coverage.
std::vector<ActivitySegment> classify_segments(
    const std::map<std::string, NormalizedHrSeries>& series,
    const std::vector<MovementInterval>& movement, const ActivityParams& params = {});

/// segments.csv: start,end,label,group_elevation_bpm,dispersion_bpm,moving
std::string segments_csv(const std::vector<ActivitySegment>& segments);

std::string normalized_hr_csv(const std::vector<NormalizedHrSample>& samples);

} // namespace banfusion
