#pragma once

#include <stdexcept>
#include <string>

namespace fanwatt {

// Error families. Each family maps to a distinct process exit code in the
// CLI (see exit_code()); library code throws, tools translate.
enum class ErrorFamily {
    internal = 1,
    usage = 2,
    parse = 3,
    unsupported_format = 4,
    empty_input = 5,
    alignment = 6,
    invalid_input = 7,
    dimension = 8,
    divergence = 9,
    incompatible_model = 10,
    stratification = 11,
    io = 12,
};

inline const char* family_name(ErrorFamily f) {
    switch (f) {
        case ErrorFamily::internal: return "internal";
        case ErrorFamily::usage: return "usage";
        case ErrorFamily::parse: return "parse";
        case ErrorFamily::unsupported_format: return "unsupported-format";
        case ErrorFamily::empty_input: return "empty-input";
        case ErrorFamily::alignment: return "alignment";
        case ErrorFamily::invalid_input: return "invalid-input";
        case ErrorFamily::dimension: return "dimension";
        case ErrorFamily::divergence: return "divergence";
        case ErrorFamily::incompatible_model: return "incompatible-model";
        case ErrorFamily::stratification: return "stratification";
        case ErrorFamily::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, const std::string& message)
        : std::runtime_error(std::string(family_name(family)) + ": " + message),
          family_(family),
          message_(message) {}

    ErrorFamily family() const { return family_; }
    int exit_code() const { return static_cast<int>(family_); }

    // The message without the family prefix what() carries, for callers that
    // print the family themselves.
    const std::string& message() const { return message_; }

private:
    ErrorFamily family_;
    std::string message_;
};

}  // namespace fanwatt
