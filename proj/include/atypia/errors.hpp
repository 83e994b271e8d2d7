#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace atypia {

// Coarse failure category, used by the CLI to pick an exit code.
enum class ErrorCategory { Input = 2, Model = 3, Internal = 4 };

// All library errors carry a stable machine-readable kind (e.g. "EmptySample",
// "VocabMismatch") alongside the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message,
          ErrorCategory category = ErrorCategory::Input)
        : std::runtime_error(kind + ": " + message),
          kind_(std::move(kind)),
          category_(category) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_; }

private:
    std::string kind_;
    ErrorCategory category_;
};

}  // namespace atypia
