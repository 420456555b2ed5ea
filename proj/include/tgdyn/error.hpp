#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tgdyn {

// Validation errors are caller mistakes (bad parameters, inconsistent
// requests); data errors are problems with input content or runtime state.
// The CLI maps them to exit codes 1 and 2 respectively.
enum class ErrorKind {
    validation,
    data,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, std::int64_t row = -1)
        : std::runtime_error(std::move(message)), kind_(kind), row_(row) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    // 1-based input row for parse errors, -1 when not applicable.
    [[nodiscard]] std::int64_t row() const noexcept { return row_; }

private:
    ErrorKind kind_;
    std::int64_t row_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
    throw Error(ErrorKind::validation, msg);
}

[[noreturn]] inline void fail_data(const std::string& msg, std::int64_t row = -1) {
    throw Error(ErrorKind::data, msg, row);
}

}  // namespace tgdyn
