#ifndef UBRSIM_SIM_ERROR_H
#define UBRSIM_SIM_ERROR_H

#include <stdexcept>
#include <string>

namespace ubrsim {

// Fatal runtime invariant violation. The `invariant` field names the broken
// rule so the CLI can report it before exiting.
class SimError : public std::runtime_error {
public:
    SimError(std::string invariant, const std::string& detail)
        : std::runtime_error(invariant + ": " + detail),
          invariant_(std::move(invariant)) {}

    const std::string& invariant() const { return invariant_; }

private:
    std::string invariant_;
};

// Configuration / input file problem, reported with a line number when the
// error came from parsing a file (line 0 means "not line-specific").
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

} // namespace ubrsim

#endif
