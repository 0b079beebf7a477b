#include "icpovm/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "icpovm/numeric.hpp"

namespace icpovm {

namespace {

void check_square(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square and nonempty");
    }
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix entries) : mat_(std::move(entries)) {
    check_square(mat_, "HermitianOperator");
    const double dev = (mat_ - mat_.adjoint().eval()).cwiseAbs().maxCoeff();
    if (dev > tol::kHermitian) {
        throw std::invalid_argument("HermitianOperator: not Hermitian (max deviation " +
                                    std::to_string(dev) + ")");
    }
}

HermitianOperator HermitianOperator::symmetrized(const Matrix& entries) {
    return HermitianOperator((entries + entries.adjoint()) / 2.0);
}

DensityMatrix::DensityMatrix(Matrix entries) : mat_(std::move(entries)) {
    check_square(mat_, "DensityMatrix");
    if ((mat_ - mat_.adjoint().eval()).cwiseAbs().maxCoeff() > tol::kHermitian) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < tol::kPsdFloor) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
    }
    if (std::abs(mat_.trace().real() - 1.0) > tol::kTrace ||
        std::abs(mat_.trace().imag()) > tol::kTrace) {
        throw std::invalid_argument("DensityMatrix: trace != 1");
    }
}

CVector vectorize(const Matrix& op) {
    const Eigen::Index d = op.rows();
    CVector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            v(i * d + j) = op(i, j);
        }
    }
    return v;
}

Matrix devectorize(const CVector& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(v.size()))));
    if (d * d != v.size()) {
        throw std::invalid_argument("devectorize: length is not a perfect square");
    }
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m(i, j) = v(i * d + j);
        }
    }
    return m;
}

double hs_inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("hs_inner: dimension mismatch");
    }
    const Cplx val = (a.adjoint() * b).trace();
    if (std::abs(val.imag()) > tol::kAlgebraic * std::max(1.0, std::abs(val.real()))) {
        throw std::invalid_argument("hs_inner: non-real value for supposedly Hermitian inputs");
    }
    return val.real();
}

double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
    return hs_inner(a.matrix(), b.matrix());
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix tensor(std::span<const Matrix> ops) {
    if (ops.empty()) {
        throw std::invalid_argument("tensor: empty factor list");
    }
    Matrix acc = ops[0];
    for (std::size_t i = 1; i < ops.size(); ++i) {
        acc = kron(acc, ops[i]);
    }
    return acc;
}

Matrix tensor(const std::vector<Matrix>& ops) {
    return tensor(std::span<const Matrix>(ops.data(), ops.size()));
}

RVector real_coords(const Matrix& op) {
    const Eigen::Index d = op.rows();
    RVector r(d * d);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        r(at++) = op(i, i).real();
    }
    const double rt2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            r(at++) = rt2 * op(i, j).real();
            r(at++) = rt2 * op(i, j).imag();
        }
    }
    return r;
}

Matrix from_real_coords(const RVector& coords) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(coords.size()))));
    if (d * d != coords.size()) {
        throw std::invalid_argument("from_real_coords: length is not a perfect square");
    }
    Matrix m = Matrix::Zero(d, d);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        m(i, i) = coords(at++);
    }
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const double re = coords(at++) * inv_rt2;
            const double im = coords(at++) * inv_rt2;
            m(i, j) = Cplx(re, im);
            m(j, i) = Cplx(re, -im);
        }
    }
    return m;
}

Matrix pauli_id() { return Matrix::Identity(2, 2); }

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Cplx(0, -1), Cplx(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

DensityMatrix haar_random_state(Eigen::Index d, SeededRng& rng) {
    if (d < 2) {
        throw std::invalid_argument("haar_random_state: d must be >= 2");
    }
    CVector psi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        psi(i) = Cplx(rng.gaussian(), rng.gaussian());
    }
    psi.normalize();
    return DensityMatrix(psi * psi.adjoint());
}

Matrix haar_random_unitary(Eigen::Index d, SeededRng& rng) {
    if (d < 2) {
        throw std::invalid_argument("haar_random_unitary: d must be >= 2");
    }
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            g(i, j) = Cplx(rng.gaussian(), rng.gaussian());
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i) {
        q.col(i) *= r(i, i) / std::abs(r(i, i));
    }
    return q;
}

HermitianOperator random_observable(Eigen::Index d, double lo, double hi, SeededRng& rng) {
    if (!(lo < hi)) {
        throw std::invalid_argument("random_observable: require lo < hi");
    }
    RVector lambda(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        lambda(i) = rng.uniform(lo, hi);
    }
    const Matrix u = haar_random_unitary(d, rng);
    Matrix o = u * lambda.cast<Cplx>().asDiagonal() * u.adjoint();
    return HermitianOperator::symmetrized(o);
}

HermitianOperator random_observable(Eigen::Index d, SeededRng& rng) {
    return random_observable(d, -5.0, 5.0, rng);
}

}  // namespace icpovm
