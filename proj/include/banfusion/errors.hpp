/**
 * @file errors.hpp
 * @brief Error codes and the exception type shared by all banfusion modules.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace banfusion {

enum class Errc {
    // topic bus
    duplicate_topic,
    empty_name,
    unknown_topic,
    schema_mismatch,
    // ingest
    unsorted_input,
    mixed_device,
    non_positive_input,
    unknown_device,
    // timesync
    non_monotonic_timestamps,
    invalid_model,
    empty_list,
    // hrv
    too_few_samples,
    too_short_record,
    zero_denominator,
    empty_input,
    invalid_hop,
    // geo
    out_of_range_coordinate,
    unsorted_fixes,
    // activity
    missing_subject_coverage,
    fewer_than_two_subjects,
    insufficient_coverage,
    // storage
    malformed_record,
    unknown_kind,
    // scenario / pipeline
    invalid_spec,
    io_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace banfusion
