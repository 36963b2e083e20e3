#pragma once

#include <stdexcept>
#include <string>

namespace nilm {

/// Thrown for malformed text input. `line` is 1-based, 0 when unknown;
/// `field` names the offending column, key or tree layer when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& message, std::size_t line = 0, std::string field = {})
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line),
          field_(std::move(field)) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

}  // namespace nilm
