#ifndef IRIS_ERRORS_HPP
#define IRIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace iris {

enum class ErrorCode {
    MalformedHeader,
    TruncatedPayload,
    IoFailure,
    CropTooLarge,
    EvenKernel,
    NoBoundaryFound,
    SearchRangeInvalid,
    DimensionMismatch,
    InvalidCircles,
    EmptyMask,
    MalformedFilterFile,
    EvenKernelSide,
    ShapeMismatch,
    InsufficientOverlap,
    MalformedTemplateFile,
    TooFewValidPixels,
    MissingFilterBank,
    SingleClassTrainingSet,
    MalformedModelFile,
    DegenerateDistributions,
    EmptyClass,
    UnreachableOperatingPoint,
    InvalidSpec,
    EmptyManifest,
    InvalidConfig,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                            : std::string(to_string(code)) + ": " + detail),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail = {}) {
    throw Error(code, detail);
}

} // namespace iris

#endif
