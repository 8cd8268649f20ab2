#pragma once

#include <stdexcept>
#include <string>

namespace tpinn {

// Error taxonomy. The CLI maps these onto exit codes 2 (config), 3 (data)
// and 4 (numerical); DomainError signals a violated precondition.

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by the online estimator when queried before the first snapshot is valid.
class NotYetAvailable : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

} // namespace tpinn
