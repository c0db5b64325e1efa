/**
 * @file pybind_module.cpp
 * @brief Python bindings for the main banfusion operations.
 */

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "banfusion/activity.hpp"
#include "banfusion/ban_ingest.hpp"
#include "banfusion/geo.hpp"
#include "banfusion/hrv.hpp"
#include "banfusion/pipeline.hpp"
#include "banfusion/scenario.hpp"
#include "banfusion/timesync.hpp"

namespace py = pybind11;
using namespace banfusion;

namespace {

// Keep the python surface simple: run the whole pipeline in one call.
py::dict run_pipeline(const std::string& data_dir, const std::string& out_dir,
                      const std::string& config_path) {
    PipelineConfig config = load_config(config_path);
    TopicBus bus(TopicBus::Options{.high_water_mark = config.high_water_mark, .clock = {}});
    Pipeline pipeline(bus, config);
    pipeline.load(data_dir);
    const RunSummary summary = pipeline.execute(out_dir);

    py::dict out;
    out["subjects"] = summary.subjects;
    out["rr_records"] = summary.rr_records;
    out["gps_records"] = summary.gps_records;
    out["beats"] = summary.beats;
    out["hrv_windows"] = summary.hrv_windows;
    out["movement_intervals"] = summary.movement_intervals;
    out["colocation_events"] = summary.colocation_events;
    out["segments"] = summary.segments;
    out["skew_max_gap_ms"] = summary.skew.max_gap_ms;
    out["segmentation_skipped"] = summary.segmentation_skipped;
    return out;
}

void simulate(const std::string& data_dir, std::uint64_t seed, int subjects) {
    write_scenario(generate_scenario(ScenarioSpec::lunch(seed, subjects)), data_dir);
}

} // namespace

PYBIND11_MODULE(banfusion, m) {
    m.doc() = "Multi-subject telemetry fusion: HRV analytics, clock sync, geo fusion, "
              "activity segmentation";

    py::register_exception<Error>(m, "FusionError");

    py::class_<RrSample>(m, "RrSample")
        .def(py::init([](std::string device_id, std::int64_t seq, std::int64_t rr_ms,
                         std::int64_t reception_ts) {
                 return RrSample{std::move(device_id), seq, rr_ms, reception_ts};
             }),
             py::arg("device_id"), py::arg("seq"), py::arg("rr_ms"), py::arg("reception_ts"))
        .def_readwrite("device_id", &RrSample::device_id)
        .def_readwrite("seq", &RrSample::seq)
        .def_readwrite("rr_ms", &RrSample::rr_ms)
        .def_readwrite("reception_ts", &RrSample::reception_ts);

    py::class_<ReconstructedBeat>(m, "ReconstructedBeat")
        .def_readonly("device_id", &ReconstructedBeat::device_id)
        .def_readonly("seq", &ReconstructedBeat::seq)
        .def_readonly("beat_ts", &ReconstructedBeat::beat_ts)
        .def_readonly("rr_ms", &ReconstructedBeat::rr_ms);

    py::class_<GpsFix>(m, "GpsFix")
        .def(py::init([](std::string device_id, std::int64_t ts, double lat_deg, double lon_deg,
                         double accuracy_m) {
                 return GpsFix{std::move(device_id), ts, lat_deg, lon_deg, accuracy_m};
             }),
             py::arg("device_id"), py::arg("ts"), py::arg("lat_deg"), py::arg("lon_deg"),
             py::arg("accuracy_m"))
        .def_readwrite("device_id", &GpsFix::device_id)
        .def_readwrite("ts", &GpsFix::ts)
        .def_readwrite("lat_deg", &GpsFix::lat_deg)
        .def_readwrite("lon_deg", &GpsFix::lon_deg)
        .def_readwrite("accuracy_m", &GpsFix::accuracy_m);

    py::class_<MovementInterval>(m, "MovementInterval")
        .def_readonly("device_id", &MovementInterval::device_id)
        .def_readonly("start_ts", &MovementInterval::start_ts)
        .def_readonly("end_ts", &MovementInterval::end_ts)
        .def_readonly("displacement_m", &MovementInterval::displacement_m)
        .def_readonly("mean_speed_mps", &MovementInterval::mean_speed_mps);

    py::class_<ColocationEvent>(m, "ColocationEvent")
        .def_readonly("subject_ids", &ColocationEvent::subject_ids)
        .def_readonly("start_ts", &ColocationEvent::start_ts)
        .def_readonly("end_ts", &ColocationEvent::end_ts)
        .def_readonly("max_spread_m", &ColocationEvent::max_spread_m);

    // time-domain HRV
    m.def("sdnn", [](const std::vector<double>& rr) { return sdnn(rr); },
          "Sample standard deviation of R-R intervals (ms)", py::arg("rr_ms"));
    m.def("rmssd", [](const std::vector<double>& rr) { return rmssd(rr); },
          "Root mean square of successive R-R differences (ms)", py::arg("rr_ms"));
    m.def("mean_hr", [](const std::vector<double>& rr) { return mean_hr(rr); },
          "60000 / mean(rr), bpm", py::arg("rr_ms"));
    m.def("lf_hf_ratio", &lf_hf_ratio, py::arg("lf"), py::arg("hf"));
    m.def("lf_norm", &lf_norm, py::arg("lf"), py::arg("hf"));
    m.def(
        "band_powers",
        [](const std::vector<ReconstructedBeat>& beats) {
            const BandPowers p = band_powers(beats);
            return py::make_tuple(p.lf_ms2, p.hf_ms2);
        },
        "LF/HF band powers (ms^2) of a beat sequence", py::arg("beats"));

    // ingest / throughput
    m.def("reconstruct_beat_times",
          [](const std::vector<RrSample>& samples, DurationMs gap_tolerance_ms) {
              return reconstruct_beat_times(samples, gap_tolerance_ms);
          },
          py::arg("samples"), py::arg("gap_tolerance_ms") = kDefaultGapToleranceMs);
    m.def("data_rate_estimate", &data_rate_estimate, py::arg("bytes_per_sample"),
          py::arg("hr_bpm"));
    m.def("estimate_sync_duration", &estimate_sync_duration, py::arg("data_bits"),
          py::arg("link_rate_bits_per_s"));

    // timesync
    m.def("estimate_offset", &estimate_offset, py::arg("t0"), py::arg("t1"), py::arg("t2"),
          py::arg("t3"));
    m.def(
        "to_common_clock",
        [](TimestampMs device_ts, std::int64_t offset_ms) {
            return to_common_clock(device_ts, ClockModel{"device", offset_ms});
        },
        py::arg("device_ts"), py::arg("offset_ms"));

    // geo
    m.def("haversine_m", &haversine_m, py::arg("lat1_deg"), py::arg("lon1_deg"),
          py::arg("lat2_deg"), py::arg("lon2_deg"));
    m.def(
        "detect_movement",
        [](const std::vector<GpsFix>& fixes, double window_s, double speed_threshold_mps) {
            return detect_movement(fixes, MovementParams{window_s, speed_threshold_mps});
        },
        py::arg("fixes"), py::arg("window_s") = 60.0, py::arg("speed_threshold_mps") = 0.5);
    m.def(
        "detect_colocation",
        [](const std::map<std::string, std::vector<GpsFix>>& fixes, double time_tol_s,
           double dist_tol_m) {
            ColocationParams params;
            params.time_tol_s = time_tol_s;
            params.dist_tol_m = dist_tol_m;
            return detect_colocation(fixes, params);
        },
        py::arg("fixes_by_subject"), py::arg("time_tol_s") = 2.0, py::arg("dist_tol_m") = 20.0);

    // scenario + pipeline
    m.def("simulate", &simulate, "Generate the default lunch scenario into a directory",
          py::arg("data_dir"), py::arg("seed") = 42, py::arg("subjects") = 4);
    m.def("run_pipeline", &run_pipeline, "Run the fusion pipeline over a data directory",
          py::arg("data_dir"), py::arg("out_dir"), py::arg("config_path") = std::string());
}
