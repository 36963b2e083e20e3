#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nilm/errors.hpp"
#include "nilm/evaluation.hpp"
#include "nilm/event.hpp"
#include "nilm/reconstruction.hpp"
#include "nilm/series.hpp"

namespace nilm::io {

/// Fixed six-decimal rendering, independent of the C locale.
[[nodiscard]] std::string format_fixed(double v, int decimals = 6);

struct PowerCsvOptions {
    std::string column = "power";
    // Empty: use a column named "t", "time" or "timestamp" if there is one.
    std::string time_column;
};

/// Reads a headered CSV. A time column, when present, must advance by
/// 1/rate within 1%; its first value becomes the series origin.
[[nodiscard]] PowerSeries read_power_csv(std::istream& in, double rate,
                                         const PowerCsvOptions& options = {});
[[nodiscard]] PowerSeries read_power_csv(const std::filesystem::path& path, double rate,
                                         const PowerCsvOptions& options = {});
void write_power_csv(std::ostream& out, const PowerSeries& series);

/// On-disk event row; times in seconds.
struct EventRecord {
    double start_time = 0.0;
    std::optional<double> spike_time;
    double end_time = 0.0;
    Direction direction = Direction::rising;
    double pre_mean = 0.0;
    double post_mean = 0.0;
    Provenance provenance = Provenance::main;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

inline constexpr std::string_view events_header =
    "start_time,spike_time,end_time,direction,pre_mean,post_mean,provenance";

[[nodiscard]] std::vector<EventRecord> to_records(const PowerSeries& series,
                                                  std::span<const DetectedEvent> events);
void write_events_csv(std::ostream& out, std::span<const EventRecord> events);
[[nodiscard]] std::vector<EventRecord> read_events_csv(std::istream& in);
[[nodiscard]] std::vector<TimeSpan> record_spans(std::span<const EventRecord> events);

void write_truth_csv(std::ostream& out, std::span<const GroundTruthEvent> truth);
/// `time,label`; times must be non-decreasing.
[[nodiscard]] std::vector<GroundTruthEvent> read_truth_csv(std::istream& in);

/// One parameter per line: `name min max increment`; `#` starts a comment.
[[nodiscard]] ParameterGrid parse_grid(std::istream& in);

/// Signature set as a flat JSON object: form, label [from, to], and
/// alpha..tau as [mean, std] pairs.
[[nodiscard]] SignatureSet parse_signature_set(std::string_view json_text);

/// JSON scenario document. Tree references are resolved relative to
/// base_dir.
[[nodiscard]] ScenarioSpec parse_scenario(std::string_view json_text,
                                          const std::filesystem::path& base_dir = {});

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace nilm::io
