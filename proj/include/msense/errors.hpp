#pragma once

#include <stdexcept>
#include <string>

namespace msense {

/// Markov parameters with p = q = 0 have no steady state.
class DegenerateParameters : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An exact evaluation would exceed its configured term/state cap.
/// Callers should fall back to a Monte Carlo path.
class TooLarge : public std::length_error {
public:
    using std::length_error::length_error;
};

} // namespace msense
