#pragma once

#include <stdexcept>
#include <string>

namespace kflow {

// Shape/indexing problems: operators that do not conform to their algebra,
// K0 classes indexed against the wrong ideal, malformed inputs.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A mathematical hypothesis of an operation is violated (non-projection,
// non-Fredholm, commutator outside the ideal, ...).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two routes that must agree did not. Signals a bug or a violated hidden
// hypothesis rather than bad input.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative numerics failed to converge to the requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kflow
