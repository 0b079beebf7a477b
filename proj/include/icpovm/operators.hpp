#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "icpovm/rng.hpp"

namespace icpovm {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Dense Hermitian operator on a d-dimensional Hilbert space. The constructor
/// rejects matrices that are not equal to their own conjugate transpose
/// (max entry deviation 1e-12).
class HermitianOperator {
  public:
    explicit HermitianOperator(Matrix entries);

    /// Symmetrizes (m + m^dagger)/2 before constructing; for results of
    /// floating-point arithmetic that are Hermitian up to roundoff.
    static HermitianOperator symmetrized(const Matrix& entries);

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }

  private:
    Matrix mat_;
};

/// Density matrix: Hermitian, positive semi-definite (eigenvalues >= -1e-10),
/// unit trace (within 1e-10).
class DensityMatrix {
  public:
    explicit DensityMatrix(Matrix entries);

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }

  private:
    Matrix mat_;
};

// --- double-ket vectorization (Appendix-C row-major convention) -----------
//
// vectorize(O)[i*d + j] = O(i, j), so <<A|B>> = Tr[A^dagger B].

CVector vectorize(const Matrix& op);
Matrix devectorize(const CVector& v);

/// Hilbert-Schmidt inner product Tr[a^dagger b]; real for Hermitian inputs
/// (asserted to 1e-12, imaginary part discarded).
double hs_inner(const Matrix& a, const Matrix& b);
double hs_inner(const HermitianOperator& a, const HermitianOperator& b);

/// Kronecker product of the factors in list order.
Matrix tensor(std::span<const Matrix> ops);
Matrix tensor(const std::vector<Matrix>& ops);
Matrix kron(const Matrix& a, const Matrix& b);

// --- real coordinates over an orthonormal Hermitian operator basis --------
//
// Basis order: diagonal units E_ii, then for each i<j the symmetric pair
// (E_ij+E_ji)/sqrt2 followed by the antisymmetric pair i(E_ij-E_ji)/sqrt2.
// Herm(H) with the HS inner product is a real Hilbert space of dim d^2;
// these coordinates realize it as R^{d^2}.

RVector real_coords(const Matrix& op);
Matrix from_real_coords(const RVector& coords);

// --- Pauli matrices --------------------------------------------------------

Matrix pauli_id();
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

// --- seeded random generation ----------------------------------------------

/// Haar-random pure state |psi><psi| with |psi> = G/||G||, G complex Gaussian.
DensityMatrix haar_random_state(Eigen::Index d, SeededRng& rng);

/// Haar-random unitary via QR of a complex Ginibre matrix with the R diagonal
/// phase-fixed.
Matrix haar_random_unitary(Eigen::Index d, SeededRng& rng);

/// O = U diag(lambda) U^dagger with lambda_i uniform in [lo, hi] and U Haar.
/// Draw order: the d eigenvalues first, then the unitary.
HermitianOperator random_observable(Eigen::Index d, double lo, double hi, SeededRng& rng);
HermitianOperator random_observable(Eigen::Index d, SeededRng& rng);  // [-5, 5]

}  // namespace icpovm
