#pragma once

#include <stdexcept>
#include <string>

namespace dtls {

// Raised for malformed run configurations. `key_path` names the offending
// entry (e.g. "transition.gamma") when one is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key_path, const std::string& message)
        : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
          key_path_(key_path), detail_(message) {}

    const std::string& key_path() const noexcept { return key_path_; }
    // Message without the key path.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string key_path_;
    std::string detail_;
};

// Raised when an integration produces non-finite values or a linear solve
// breaks down. `time_reached` is the last time at which the state was finite.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& message, double time_reached)
        : std::runtime_error(message + " (t = " + std::to_string(time_reached) + ")"),
          detail_(message), time_reached_(time_reached) {}

    double time_reached() const noexcept { return time_reached_; }
    // Message without the time stamp.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    double time_reached_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dtls
