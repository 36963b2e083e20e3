#include "nilm/event.hpp"

namespace nilm {

std::string_view to_string(Direction d) noexcept {
    return d == Direction::rising ? "rising" : "falling";
}

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::main: return "main";
        case Provenance::macro: return "macro";
        case Provenance::micro: return "micro";
    }
    return "main";
}

std::optional<Direction> parse_direction(std::string_view s) noexcept {
    if (s == "rising") return Direction::rising;
    if (s == "falling") return Direction::falling;
    return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view s) noexcept {
    if (s == "main") return Provenance::main;
    if (s == "macro") return Provenance::macro;
    if (s == "micro") return Provenance::micro;
    return std::nullopt;
}

}  // namespace nilm
