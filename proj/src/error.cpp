#include "parlearn/error.hpp"

namespace parlearn {

const char* to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::NotPrime: return "NotPrime";
    case Errc::TooLarge: return "TooLarge";
    case Errc::ZeroInverse: return "ZeroInverse";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadSparsity: return "BadSparsity";
    case Errc::BadRates: return "BadRates";
    case Errc::ZeroScale: return "ZeroScale";
    case Errc::ShrinkNotAllowed: return "ShrinkNotAllowed";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::TooLargeToEnumerate: return "TooLargeToEnumerate";
    case Errc::RejectionStall: return "RejectionStall";
    case Errc::NoGapFound: return "NoGapFound";
    case Errc::IntervalOverlap: return "IntervalOverlap";
    case Errc::CalibrationAmbiguous: return "CalibrationAmbiguous";
    case Errc::NoIrrelevantIndex: return "NoIrrelevantIndex";
    case Errc::AmbiguousCoefficient: return "AmbiguousCoefficient";
    case Errc::ContractViolation: return "ContractViolation";
    case Errc::EmptyCandidateSet: return "EmptyCandidateSet";
    case Errc::PreconditionFailed: return "PreconditionFailed";
    case Errc::AllRunsFailed: return "AllRunsFailed";
    case Errc::NoMajority: return "NoMajority";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what)
{
}

} // namespace parlearn
