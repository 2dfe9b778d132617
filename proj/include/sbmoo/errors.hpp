#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbmoo {

/// Precondition violated by caller-supplied data.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value (bin count, metric name, algorithm id, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Statistic is undefined for the given sample (e.g. zero variance).
struct UndefinedStatistic : std::domain_error {
    using std::domain_error::domain_error;
};

/// An optimiser asked for more evaluations than the run budget allows.
struct BudgetExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Trace file could not be parsed. Carries the 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

/// A parsed trace violates one of the RunTrace invariants.
struct IntegrityError : std::runtime_error {
    IntegrityError(const std::string& invariant, const std::string& detail)
        : std::runtime_error("integrity violation [" + invariant + "]: " + detail),
          invariant(invariant) {}
    std::string invariant;
};

/// The external optimiser broke the audit wire protocol.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sbmoo
