#pragma once

#include <stdexcept>
#include <string>

namespace sagda {

enum class errc {
    // csv / table
    malformed_csv,
    type_coercion,
    duplicate_header,
    io_failure,
    unknown_column,
    type_mismatch,
    // catalog
    manifest_parse,
    duplicate_id,
    dangling_path,
    // generation
    invalid_spec,
    not_positive_semi_definite,
    // augmentation
    too_few_rows,
    k_too_large,
    non_numeric_feature,
    empty_stratum,
    non_numeric_column,
    degenerate_index,
    // validation
    empty_sample,
    zero_variance,
    singular_covariance,
    // model
    unknown_season,
    empty_side,
    singular_system,
    zero_target,
    // optimize
    invalid_config,
    model_failure,
    length_mismatch,
    // simulate
    empty_weather,
    action_out_of_range,
    network_failure,
    api_schema_change,
    invalid_coords,
    // visualize
    unsorted_x,
    duplicate_cell,
    // cli / config
    config_parse,
    usage,
};

// Exit-code buckets used by the CLI: 1 usage, 2 data, 3 external service.
enum class error_kind { usage = 1, data = 2, external = 3 };

inline error_kind kind_of(errc c) {
    switch (c) {
        case errc::usage:
        case errc::config_parse:
        case errc::invalid_config:
            return error_kind::usage;
        case errc::network_failure:
        case errc::api_schema_change:
            return error_kind::external;
        default:
            return error_kind::data;
    }
}

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::malformed_csv: return "MalformedCsv";
        case errc::type_coercion: return "TypeCoercion";
        case errc::duplicate_header: return "DuplicateHeader";
        case errc::io_failure: return "IoFailure";
        case errc::unknown_column: return "UnknownColumn";
        case errc::type_mismatch: return "TypeMismatch";
        case errc::manifest_parse: return "ManifestParse";
        case errc::duplicate_id: return "DuplicateId";
        case errc::dangling_path: return "DanglingPath";
        case errc::invalid_spec: return "InvalidSpec";
        case errc::not_positive_semi_definite: return "NotPositiveSemiDefinite";
        case errc::too_few_rows: return "TooFewRows";
        case errc::k_too_large: return "KTooLarge";
        case errc::non_numeric_feature: return "NonNumericFeature";
        case errc::empty_stratum: return "EmptyStratum";
        case errc::non_numeric_column: return "NonNumericColumn";
        case errc::degenerate_index: return "DegenerateIndex";
        case errc::empty_sample: return "EmptySample";
        case errc::zero_variance: return "ZeroVariance";
        case errc::singular_covariance: return "SingularCovariance";
        case errc::unknown_season: return "UnknownSeason";
        case errc::empty_side: return "EmptySide";
        case errc::singular_system: return "SingularSystem";
        case errc::zero_target: return "ZeroTarget";
        case errc::invalid_config: return "InvalidConfig";
        case errc::model_failure: return "ModelFailure";
        case errc::length_mismatch: return "LengthMismatch";
        case errc::empty_weather: return "EmptyWeather";
        case errc::action_out_of_range: return "ActionOutOfRange";
        case errc::network_failure: return "NetworkFailure";
        case errc::api_schema_change: return "ApiSchemaChange";
        case errc::invalid_coords: return "InvalidCoords";
        case errc::unsorted_x: return "UnsortedX";
        case errc::duplicate_cell: return "DuplicateCell";
        case errc::config_parse: return "ConfigParse";
        case errc::usage: return "Usage";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const noexcept { return code_; }
    error_kind kind() const noexcept { return kind_of(code_); }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) {
    throw error(code, msg);
}

}  // namespace sagda
