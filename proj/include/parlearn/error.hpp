#pragma once

#include <stdexcept>
#include <string>

namespace parlearn {

enum class Errc {
    NotPrime,
    TooLarge,
    ZeroInverse,
    DimensionMismatch,
    BadSparsity,
    BadRates,
    ZeroScale,
    ShrinkNotAllowed,
    OutOfDomain,
    EmptyBand,
    TooLargeToEnumerate,
    RejectionStall,
    NoGapFound,
    IntervalOverlap,
    CalibrationAmbiguous,
    NoIrrelevantIndex,
    AmbiguousCoefficient,
    ContractViolation,
    EmptyCandidateSet,
    PreconditionFailed,
    AllRunsFailed,
    NoMajority,
    BudgetExceeded,
    ParseError,
    IoError,
};

const char* to_string(Errc code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    Errc code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

} // namespace parlearn
