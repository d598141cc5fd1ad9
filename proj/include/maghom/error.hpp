#pragma once

#include <stdexcept>
#include <string>

namespace maghom {

/// Base of every error raised by the library. `name()` is the stable
/// machine-readable identifier surfaced by the CLI in its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define MAGHOM_DEFINE_ERROR(Type)                                          \
    class Type : public Error {                                            \
    public:                                                                \
        explicit Type(const std::string& what) : Error(#Type, what) {}     \
    }

MAGHOM_DEFINE_ERROR(InvalidResolution);
MAGHOM_DEFINE_ERROR(InvalidGeometry);
MAGHOM_DEFINE_ERROR(SolidTouchesBoundary);
MAGHOM_DEFINE_ERROR(ContrastViolation);
MAGHOM_DEFINE_ERROR(InconsistentConstraints);
MAGHOM_DEFINE_ERROR(FormulaMismatch);
MAGHOM_DEFINE_ERROR(IncompatibleFlux);
MAGHOM_DEFINE_ERROR(NotSPD);
MAGHOM_DEFINE_ERROR(UnderResolved);
MAGHOM_DEFINE_ERROR(ParseError);
MAGHOM_DEFINE_ERROR(ValidationError);
MAGHOM_DEFINE_ERROR(IoError);

#undef MAGHOM_DEFINE_ERROR

/// Raised by the iterative solvers when the iteration budget is exhausted.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, double residual)
        : Error("NoConvergence", what + " (iterations=" + std::to_string(iterations) +
                                     ", relative residual=" + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

} // namespace maghom
