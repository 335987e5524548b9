#pragma once

#include "sbcrb/types.hpp"

namespace sbcrb {

inline constexpr double kMaxCondition = 1e14;

/// Ascending eigenvalues of a Hermitian matrix (only the lower triangle is read).
RVector hermitian_eigenvalues(const CMatrix& A);

/// tr(A^{-1}) for Hermitian positive definite A; throws SingularGram when the
/// condition number exceeds kMaxCondition. `label` names the matrix in the message.
double trace_inverse_hermitian(const CMatrix& A, const char* label);

/// Same as above from a precomputed ascending spectrum.
double trace_inverse_spectrum(const RVector& eigs, const char* label);

CMatrix kron(const CMatrix& A, const CMatrix& B);

}  // namespace sbcrb
