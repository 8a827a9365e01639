// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tubal {

enum class ErrorCode {
    DimMismatch,
    ImaginaryResidue,
    SizeGuard,
    RankOutOfRange,
    DegenerateInput,
    InvalidConfig,
    SpecInvalid,
    BadMagic,
    TruncatedFile,
    DimOverflow,
    BadHeader,
    InconsistentDims,
    EmptyDir,
    IoFailure,
    NonFinite,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorCode::SizeGuard: return "SizeGuard";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::DimOverflow: return "DimOverflow";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::InconsistentDims: return "InconsistentDims";
    case ErrorCode::EmptyDir: return "EmptyDir";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::NonFinite: return "NonFinite";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tubal
