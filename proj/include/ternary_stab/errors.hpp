// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tstab {

/// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape mismatch, non-finite entries, out-of-range (d, l).
class RejectedInput : public Error {
public:
    using Error::Error;
};

/// A documented precondition does not hold (e.g. a candidate unit is not a unit).
class PreconditionViolation : public Error {
public:
    using Error::Error;
};

/// A custom control function returned a negative or non-finite value.
class ControlContractError : public Error {
public:
    using Error::Error;
};

/// The q^{-j} series of a control could not be certified convergent.
class NonSummable : public Error {
public:
    using Error::Error;
};

/// Closed-form bound requested for an exponent outside [0, 1).
class OutOfTheoremRange : public Error {
public:
    using Error::Error;
};

/// ||q^n x|| left the representable range before the iteration converged.
class RangeExhausted : public Error {
public:
    RangeExhausted(const std::string& what, int max_usable_n)
        : Error(what), max_usable_n_(max_usable_n) {}

    int max_usable_n() const noexcept { return max_usable_n_; }

private:
    int max_usable_n_;
};

}  // namespace tstab
