#pragma once

#include <stdexcept>
#include <string>

namespace semor {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A factorization encountered a pivot below threshold, or a matrix that is
/// required to be invertible is (numerically) singular.
class SingularMatrixError : public Error {
public:
    explicit SingularMatrixError(const std::string& msg) : Error(msg) {}
};

/// The pencil (A,E) is singular: det(A + lambda*E) vanishes identically.
class SingularPencilError : public Error {
public:
    explicit SingularPencilError(const std::string& msg) : Error(msg) {}
};

/// Lyapunov/Sylvester equation has no unique solution (spectra of a and -a
/// overlap within tolerance).
class NonUniqueSolutionError : public Error {
public:
    explicit NonUniqueSolutionError(const std::string& msg) : Error(msg) {}
};

/// Complex shifts must come in conjugate pairs to allow a real realization.
class UnpairedComplexShiftError : public Error {
public:
    explicit UnpairedComplexShiftError(const std::string& msg) : Error(msg) {}
};

class ZeroDirectionError : public Error {
public:
    explicit ZeroDirectionError(const std::string& msg) : Error(msg) {}
};

/// A shift coincides with a generalized eigenvalue of (A,E); the shifted
/// solve broke down.
class ShiftOnSpectrumError : public Error {
public:
    explicit ShiftOnSpectrumError(const std::string& msg) : Error(msg) {}
};

/// Pseudo-optimal reduction requires all shifts in the open right half-plane.
class ShiftInClosedLeftHalfPlaneError : public Error {
public:
    explicit ShiftInClosedLeftHalfPlaneError(const std::string& msg) : Error(msg) {}
};

/// The small Lyapunov solution is singular, i.e. the interpolation data is
/// not an observable pair.
class LyapunovSingularError : public Error {
public:
    explicit LyapunovSingularError(const std::string& msg) : Error(msg) {}
};

/// W^T E V is singular and no reduced model can be formed.
class SingularProjectionError : public Error {
public:
    explicit SingularProjectionError(const std::string& msg) : Error(msg) {}
};

/// One-sided reduction was requested on a system whose structure does not
/// permit it (B22 != 0 for input side, C22 != 0 for output side, and the
/// symmetry fallback does not hold either).
class StructuralGuardError : public Error {
public:
    explicit StructuralGuardError(const std::string& msg) : Error(msg) {}
};

class UnstableSystemError : public Error {
public:
    explicit UnstableSystemError(const std::string& msg) : Error(msg) {}
};

class NotPositiveDefiniteError : public Error {
public:
    explicit NotPositiveDefiniteError(const std::string& msg) : Error(msg) {}
};

/// Matrix Market input could not be brought to semi-explicit form by a
/// symmetric permutation.
class NotSemiExplicitError : public Error {
public:
    explicit NotSemiExplicitError(const std::string& msg) : Error(msg) {}
};

class DimensionMismatchError : public Error {
public:
    explicit DimensionMismatchError(const std::string& msg) : Error(msg) {}
};

class FeedthroughMismatchError : public Error {
public:
    explicit FeedthroughMismatchError(const std::string& msg) : Error(msg) {}
};

class PseudoOptimalityViolatedError : public Error {
public:
    explicit PseudoOptimalityViolatedError(const std::string& msg) : Error(msg) {}
};

class OptimizerFailedError : public Error {
public:
    explicit OptimizerFailedError(const std::string& msg) : Error(msg) {}
};

class StagnationDetectedError : public Error {
public:
    explicit StagnationDetectedError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace semor
