/**
 * @file geo.hpp
 * @brief Multi-subject GPS fusion: co-location events (groups sharing a
 *        spatial region over a time interval) and per-subject movement
 *        intervals.
 *
 * Positioning accuracy varies from a few meters outdoors to over a kilometer
 * indoors, so both detectors are accuracy-aware: the co-location rule inflates
 * its distance tolerance by the fixes' accuracies, and the movement detector
 * requires displacement to clear twice the window's median accuracy before it
 * believes a speed estimate. No trajectory inference is attempted.
 */

#pragma once

#include <map>
#include <string>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion {

struct ColocationParams {
    double time_tol_s = 2.0;   // matches the clock skew budget
    double dist_tol_m = 20.0;  // usable-GPS resolution threshold
    DurationMs slice_ms = 10'000;
    DurationMs merge_gap_ms = 60'000;
};

struct MovementParams {
    double window_s = 60.0;
    double speed_threshold_mps = 0.5;
};

/// Great-circle distance in meters (Earth radius 6371 km).
/// Throws out_of_range_coordinate.
double haversine_m(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

/// Detects intervals during which groups of subjects share a spatial region.
///
/// Subjects i and j are co-located at a slice time t when each has a fix
/// within time_tol_s of t and the fix distance is at most
/// dist_tol_m + accuracy_i + accuracy_j. Pairs are lifted to groups via
/// connected components per slice; per-group intervals merge across gaps
/// shorter than merge_gap_ms, and only maximal-by-inclusion groups are
/// emitted. Requires fixes sorted by ts per subject; throws unsorted_fixes.
std::vector<ColocationEvent> detect_colocation(
    const std::map<std::string, std::vector<GpsFix>>& fixes_by_subject,
    const ColocationParams& params = {});

/// Detects windows of directed motion: net displacement over the window must
/// reach speed_threshold_mps and exceed twice the window's median accuracy.
/// Adjacent moving windows merge. Requires sorted fixes; throws unsorted_fixes.
std::vector<MovementInterval> detect_movement(const std::vector<GpsFix>& fixes,
                                              const MovementParams& params = {});

/// GeoJSON FeatureCollection of fixes plus co-location centroids.
std::string geojson_export(const std::map<std::string, std::vector<GpsFix>>& fixes_by_subject,
                           const std::vector<ColocationEvent>& events);

/// movement.csv: device_id,start,end,displacement_m,mean_speed_mps
std::string movement_csv(const std::vector<MovementInterval>& intervals);

} // namespace banfusion
