#pragma once

#include <stdexcept>
#include <string>

namespace ielab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// instance is beyond desk scale
struct CapExceeded : Error {
    using Error::Error;
};

// conditioning on an event of zero probability
struct ZeroEvidence : Error {
    using Error::Error;
};

// gap of an empty or full policy subset
struct DegenerateSplit : Error {
    using Error::Error;
};

struct AssumptionViolated : Error {
    using Error::Error;
};

struct PreconditionViolated : Error {
    using Error::Error;
};

struct OracleUnavailable : Error {
    using Error::Error;
};

// malformed model, prior, ledger or config
struct InvalidInput : Error {
    using Error::Error;
};

}  // namespace ielab
