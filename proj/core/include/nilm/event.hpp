#pragma once

#include <optional>
#include <string_view>

#include "nilm/series.hpp"

namespace nilm {

enum class Direction { rising, falling };
enum class Provenance { main, macro, micro };

[[nodiscard]] std::string_view to_string(Direction d) noexcept;
[[nodiscard]] std::string_view to_string(Provenance p) noexcept;
[[nodiscard]] std::optional<Direction> parse_direction(std::string_view s) noexcept;
[[nodiscard]] std::optional<Provenance> parse_provenance(std::string_view s) noexcept;

/// A detected transition period: start, optional transient spike, end.
struct DetectedEvent {
    Index start = 0;
    std::optional<Index> spike;
    Index end = 0;
    Direction direction = Direction::rising;
    double pre_mean = 0.0;
    double post_mean = 0.0;
    Provenance provenance = Provenance::main;
    // Keypoint search fell back to the span boundaries.
    bool degenerate = false;

    friend bool operator==(const DetectedEvent&, const DetectedEvent&) = default;
};

}  // namespace nilm
