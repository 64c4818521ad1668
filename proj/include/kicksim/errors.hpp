#pragma once

#include <stdexcept>
#include <string>

namespace kicksim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dynamics
struct SingularMixing : Error {
    using Error::Error;
};
struct NegativeRotorForce : Error {
    using Error::Error;
};
struct NonFiniteState : Error {
    using Error::Error;
};

// trajectory ingest
struct ParseError : Error {
    using Error::Error;
};
struct NonMonotonicFrames : Error {
    using Error::Error;
};
struct EmptyTrack : Error {
    using Error::Error;
};
struct GapTooLarge : Error {
    using Error::Error;
};

// metrics
struct LengthMismatch : Error {
    using Error::Error;
};
struct EmptySeries : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace kicksim
