#ifndef PLLI_ERROR_HPP
#define PLLI_ERROR_HPP

#include <stdexcept>
#include <string>

namespace plli {

enum class ErrorKind {
    EmptyTable,
    MissingTargetColumn,
    NonFiniteValue,
    DuplicateRowId,
    InvalidConfig,
    UnsupportedCombination,
    EmptyRegion,
    NumericalFailure,
    DimensionMismatch,
    EmptyCentroidList,
    IndexOutOfRange,
    InvertedRange,
    InsufficientData,
    InconsistentTables,
    KTooLarge,
    TooLargeForOracle,
    TooFewPoints,
    SchemaMismatch,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EmptyTable: return "EmptyTable";
        case ErrorKind::MissingTargetColumn: return "MissingTargetColumn";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::DuplicateRowId: return "DuplicateRowId";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::UnsupportedCombination: return "UnsupportedCombination";
        case ErrorKind::EmptyRegion: return "EmptyRegion";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyCentroidList: return "EmptyCentroidList";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::InvertedRange: return "InvertedRange";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::InconsistentTables: return "InconsistentTables";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::TooLargeForOracle: return "TooLargeForOracle";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::SchemaMismatch: return "SchemaMismatch";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace plli

#endif  // PLLI_ERROR_HPP
