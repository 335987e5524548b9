#include "sbcrb/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sbcrb/errors.hpp"

namespace sbcrb {

RVector hermitian_eigenvalues(const CMatrix& A) {
  if (A.rows() != A.cols()) throw ShapeError("eigenvalues requested for a non-square matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NonFinite("Hermitian eigen-decomposition failed");
  return es.eigenvalues();
}

double trace_inverse_spectrum(const RVector& eigs, const char* label) {
  if (eigs.size() == 0) throw EmptyInput(std::string(label) + " is empty");
  const double lo = eigs.minCoeff();
  const double hi = eigs.maxCoeff();
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw NonFinite(std::string(label) + " has non-finite eigenvalues");
  if (lo <= 0.0 || hi / lo > kMaxCondition) {
    throw SingularGram(std::string(label) + " is singular (condition number above 1e14)");
  }
  return (1.0 / eigs.array()).sum();
}

double trace_inverse_hermitian(const CMatrix& A, const char* label) {
  return trace_inverse_spectrum(hermitian_eigenvalues(A), label);
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

}  // namespace sbcrb
