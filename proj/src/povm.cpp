#include "icpovm/povm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "icpovm/numeric.hpp"

namespace icpovm {

namespace {

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
        labels[k] = std::to_string(k);
    }
    return labels;
}

Eigen::Matrix2cd givens2(double theta, double phi) {
    Eigen::Matrix2cd g;
    const Cplx c = std::cos(theta);
    const Cplx s = std::sin(theta);
    g << c, -std::exp(Cplx(0, phi)) * s, std::exp(Cplx(0, -phi)) * s, c;
    return g;
}

void check_open_simplex(double q_x, double q_y) {
    if (!(q_x > 0.0) || !(q_y > 0.0) || !(q_x + q_y < 1.0)) {
        throw std::invalid_argument("basis probabilities must lie in the open simplex");
    }
}

/// The six +-X, +-Y, +-Z eigenstate projectors in label order.
std::vector<Matrix> pauli_basis_projectors() {
    const Cplx i(0, 1);
    CVector xp(2), xm(2), yp(2), ym(2), zp(2), zm(2);
    const double s = 1.0 / std::sqrt(2.0);
    xp << s, s;
    xm << s, -s;
    yp << s, i * s;
    ym << s, -i * s;
    zp << 1, 0;
    zm << 0, 1;
    std::vector<Matrix> proj;
    for (const auto& v : {xp, xm, yp, ym, zp, zm}) {
        proj.push_back(v * v.adjoint());
    }
    return proj;
}

const std::vector<std::string> kPauliLabels = {"X+", "X-", "Y+", "Y-", "Z+", "Z-"};

}  // namespace

Povm::Povm(std::vector<Matrix> effects, std::vector<std::string> labels)
    : effects_(std::move(effects)), labels_(std::move(labels)) {
    if (effects_.empty()) {
        throw std::invalid_argument("Povm: no effects");
    }
    if (labels_.empty()) {
        labels_ = default_labels(effects_.size());
    }
    if (labels_.size() != effects_.size()) {
        throw std::invalid_argument("Povm: label count mismatch");
    }
    const Eigen::Index d = effects_.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& m : effects_) {
        if (m.rows() != d || m.cols() != d) {
            throw std::invalid_argument("Povm: inconsistent effect dimensions");
        }
        if ((m - m.adjoint().eval()).cwiseAbs().maxCoeff() > tol::kHermitian) {
            throw std::invalid_argument("Povm: effect not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < tol::kPsdFloor) {
            throw std::invalid_argument("Povm: effect not positive semi-definite");
        }
        sum += m;
    }
    if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol::kTrace) {
        throw std::invalid_argument("Povm: effects do not sum to the identity");
    }
}

Povm::Povm(std::vector<Matrix> effects)
    : Povm(std::move(effects), {}) {}

ProductPovm::ProductPovm(std::vector<Povm> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) {
        throw std::invalid_argument("ProductPovm: empty factor list");
    }
}

Eigen::Index ProductPovm::dim() const {
    Eigen::Index d = 1;
    for (const auto& f : factors_) {
        d *= f.dim();
    }
    return d;
}

std::int64_t ProductPovm::n_outcomes() const {
    std::int64_t n = 1;
    for (const auto& f : factors_) {
        n *= f.n_outcomes();
    }
    return n;
}

std::vector<int> ProductPovm::radices() const {
    std::vector<int> r(factors_.size());
    std::transform(factors_.begin(), factors_.end(), r.begin(),
                   [](const Povm& p) { return p.n_outcomes(); });
    return r;
}

Matrix ProductPovm::materialize_effect(const std::vector<int>& outcome) const {
    if (outcome.size() != factors_.size()) {
        throw std::invalid_argument("materialize_effect: outcome length mismatch");
    }
    Matrix acc = factors_[0].effect(outcome[0]);
    for (std::size_t s = 1; s < factors_.size(); ++s) {
        acc = kron(acc, factors_[s].effect(outcome[s]));
    }
    return acc;
}

Matrix ProductPovm::materialize_effect(std::int64_t flat) const {
    return materialize_effect(unflatten(flat));
}

Povm ProductPovm::materialize() const {
    std::vector<Matrix> effects;
    std::vector<std::string> labels;
    const std::int64_t n = n_outcomes();
    effects.reserve(n);
    labels.reserve(n);
    for (std::int64_t k = 0; k < n; ++k) {
        const auto idx = unflatten(k);
        effects.push_back(materialize_effect(idx));
        std::string label;
        for (std::size_t s = 0; s < idx.size(); ++s) {
            label += (s ? "," : "") + std::to_string(idx[s]);
        }
        labels.push_back(std::move(label));
    }
    return Povm(std::move(effects), std::move(labels));
}

std::vector<int> ProductPovm::unflatten(std::int64_t flat) const {
    std::vector<int> idx(factors_.size());
    for (int s = static_cast<int>(factors_.size()) - 1; s >= 0; --s) {
        const int n = factors_[s].n_outcomes();
        idx[s] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

std::int64_t ProductPovm::flatten(const std::vector<int>& outcome) const {
    std::int64_t flat = 0;
    for (std::size_t s = 0; s < factors_.size(); ++s) {
        flat = flat * factors_[s].n_outcomes() + outcome[s];
    }
    return flat;
}

Povm classical_shadows_povm() {
    auto proj = pauli_basis_projectors();
    std::vector<Matrix> effects;
    for (auto& p : proj) {
        effects.push_back(p / 3.0);
    }
    return Povm(std::move(effects), kPauliLabels);
}

Povm lbcs_povm(double q_x, double q_y) {
    check_open_simplex(q_x, q_y);
    const double q_z = 1.0 - q_x - q_y;
    const double q[6] = {q_x, q_x, q_y, q_y, q_z, q_z};
    auto proj = pauli_basis_projectors();
    std::vector<Matrix> effects;
    for (int k = 0; k < 6; ++k) {
        effects.push_back(q[k] * proj[k]);
    }
    return Povm(std::move(effects), kPauliLabels);
}

Matrix unitary_zyz(double theta, double phi, double lam) {
    const Cplx i(0, 1);
    Matrix u(2, 2);
    u << std::cos(theta / 2), -std::exp(i * lam) * std::sin(theta / 2),
        std::exp(i * phi) * std::sin(theta / 2),
        std::exp(i * (phi + lam)) * std::cos(theta / 2);
    return u;
}

Povm mub_povm(double q_x, double q_y, double theta, double phi, double lam) {
    check_open_simplex(q_x, q_y);
    const Matrix u = unitary_zyz(theta, phi, lam);
    Povm lbcs = lbcs_povm(q_x, q_y);
    std::vector<Matrix> effects;
    for (const auto& m : lbcs.effects()) {
        effects.push_back(u.adjoint() * m * u);
    }
    return Povm(std::move(effects), kPauliLabels);
}

Povm general_pm_simulable_povm(double q_x, double q_y, const std::array<double, 9>& angles) {
    check_open_simplex(q_x, q_y);
    const double q_z = 1.0 - q_x - q_y;
    const double q[3] = {q_x, q_y, q_z};
    auto proj = pauli_basis_projectors();
    std::vector<Matrix> effects;
    for (int b = 0; b < 3; ++b) {
        const Matrix u = unitary_zyz(angles[3 * b], angles[3 * b + 1], angles[3 * b + 2]);
        for (int sign = 0; sign < 2; ++sign) {
            effects.push_back(q[b] * (u.adjoint() * proj[2 * b + sign] * u));
        }
    }
    return Povm(std::move(effects), kPauliLabels);
}

Povm dilation4_povm(const std::array<double, 8>& params) {
    const Eigen::Matrix2cd u1 = givens2(params[0], params[1]);
    const Eigen::Matrix2cd u2 = givens2(params[2], 0.0);
    const Eigen::Vector2d cosv(std::cos(params[3]), std::cos(params[4]));
    const Eigen::Vector2d sinv(std::sin(params[3]), std::sin(params[4]));
    const Matrix w = unitary_zyz(params[5], params[6], params[7]);
    Matrix v(4, 2);
    v.topRows(2) = u1 * cosv.asDiagonal();
    v.bottomRows(2) = u2 * sinv.asDiagonal();
    v = v * w.adjoint();
    std::vector<Matrix> effects;
    for (int k = 0; k < 4; ++k) {
        const Eigen::RowVector2cd row = v.row(k);
        Matrix m = row.adjoint() * row;
        effects.push_back((m + m.adjoint().eval()) / 2.0);
    }
    return Povm(std::move(effects), {"0", "1", "2", "3"});
}

std::array<double, 8> dilation4_sic_params() {
    const double pi = std::acos(-1.0);
    const double inv_rt3 = 1.0 / std::sqrt(3.0);
    return {pi / 4, pi / 2, pi / 4, std::acos(std::sqrt((1.0 + inv_rt3) / 2.0)),
            std::acos(std::sqrt((1.0 - inv_rt3) / 2.0)), 0.0, 0.0, 0.0};
}

ProductPovm product_povm(std::vector<Povm> factors) {
    return ProductPovm(std::move(factors));
}

int povm_class_param_count(PovmClass c) {
    switch (c) {
        case PovmClass::ClassicalShadows: return 0;
        case PovmClass::Lbcs: return 2;
        case PovmClass::Mub: return 5;
        case PovmClass::GeneralPmSimulable: return 11;
        case PovmClass::Dilation4: return 8;
    }
    throw std::invalid_argument("unknown POVM class");
}

std::string povm_class_name(PovmClass c) {
    switch (c) {
        case PovmClass::ClassicalShadows: return "classical-shadows";
        case PovmClass::Lbcs: return "lbcs";
        case PovmClass::Mub: return "mub";
        case PovmClass::GeneralPmSimulable: return "general-pm";
        case PovmClass::Dilation4: return "dilation4";
    }
    throw std::invalid_argument("unknown POVM class");
}

PovmClass povm_class_from_name(const std::string& name) {
    if (name == "classical-shadows") return PovmClass::ClassicalShadows;
    if (name == "lbcs") return PovmClass::Lbcs;
    if (name == "mub") return PovmClass::Mub;
    if (name == "general-pm") return PovmClass::GeneralPmSimulable;
    if (name == "dilation4") return PovmClass::Dilation4;
    throw std::invalid_argument("unknown POVM class name: " + name);
}

Povm build_povm(const PovmClassSpec& spec) {
    const auto expected = static_cast<std::size_t>(povm_class_param_count(spec.class_id));
    if (spec.params.size() != expected) {
        throw std::invalid_argument("PovmClassSpec: expected " + std::to_string(expected) +
                                    " parameters for class " + povm_class_name(spec.class_id));
    }
    const auto& p = spec.params;
    switch (spec.class_id) {
        case PovmClass::ClassicalShadows:
            return classical_shadows_povm();
        case PovmClass::Lbcs:
            return lbcs_povm(p[0], p[1]);
        case PovmClass::Mub:
            return mub_povm(p[0], p[1], p[2], p[3], p[4]);
        case PovmClass::GeneralPmSimulable: {
            std::array<double, 9> angles;
            std::copy_n(p.begin() + 2, 9, angles.begin());
            return general_pm_simulable_povm(p[0], p[1], angles);
        }
        case PovmClass::Dilation4: {
            std::array<double, 8> params;
            std::copy_n(p.begin(), 8, params.begin());
            return dilation4_povm(params);
        }
    }
    throw std::invalid_argument("unknown POVM class");
}

RVector born_probabilities(const Povm& povm, const DensityMatrix& rho) {
    if (povm.dim() != rho.dim()) {
        throw std::invalid_argument("born_probabilities: dimension mismatch");
    }
    RVector p(povm.n_outcomes());
    for (int k = 0; k < povm.n_outcomes(); ++k) {
        p(k) = (rho.matrix() * povm.effect(k)).trace().real();
    }
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (p(k) < 0) {
            if (p(k) < tol::kProbabilityClip) {
                throw std::runtime_error("born_probabilities: negative probability " +
                                         std::to_string(p(k)));
            }
            p(k) = 0.0;
        }
    }
    return p;
}

namespace {

// Contracts site `s` of rho_partial (dim 2^{remaining}) with effect m:
// returns sum_{i,l} m(i,l) * block(l,i).
Matrix contract_site(const Matrix& rho_partial, const Matrix& m) {
    const Eigen::Index half = rho_partial.rows() / 2;
    Matrix out = Matrix::Zero(half, half);
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index l = 0; l < 2; ++l) {
            if (m(i, l) != Cplx(0, 0)) {
                out += m(i, l) * rho_partial.block(l * half, i * half, half, half);
            }
        }
    }
    return out;
}

void born_recurse(const ProductPovm& povm, int site, const Matrix& rho_partial, double* out,
                  std::int64_t& at) {
    if (site == povm.n_sites()) {
        out[at++] = rho_partial(0, 0).real();
        return;
    }
    for (int k = 0; k < povm.factor(site).n_outcomes(); ++k) {
        born_recurse(povm, site + 1, contract_site(rho_partial, povm.factor(site).effect(k)),
                     out, at);
    }
}

}  // namespace

RVector born_probabilities(const ProductPovm& povm, const DensityMatrix& rho) {
    if (povm.dim() != rho.dim()) {
        throw std::invalid_argument("born_probabilities: dimension mismatch");
    }
    RVector p(povm.n_outcomes());
    std::int64_t at = 0;
    born_recurse(povm, 0, rho.matrix(), p.data(), at);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (p(k) < 0) {
            if (p(k) < tol::kProbabilityClip) {
                throw std::runtime_error("born_probabilities: negative probability");
            }
            p(k) = 0.0;
        }
    }
    return p;
}

std::int64_t OutcomeRecord::flatten(std::int64_t shot) const {
    const auto& o = outcomes.at(shot);
    std::int64_t flat = 0;
    for (int s = 0; s < n_sites; ++s) {
        flat = flat * radices[s] + o[s];
    }
    return flat;
}

namespace {

std::vector<std::int64_t> sample_flat(const RVector& probs, std::int64_t shots, SeededRng& rng) {
    if (shots < 1) {
        throw std::invalid_argument("sample_outcomes: need at least one shot");
    }
    RVector cdf(probs.size());
    double acc = 0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
        acc += probs(k);
        cdf(k) = acc;
    }
    cdf(probs.size() - 1) = 1.0;
    std::vector<std::int64_t> flat(shots);
    for (std::int64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform();
        const double* begin = cdf.data();
        const double* it = std::upper_bound(begin, begin + cdf.size(), u);
        flat[s] = it - begin;
    }
    return flat;
}

}  // namespace

OutcomeRecord sample_outcomes(const Povm& povm, const DensityMatrix& rho, std::int64_t shots,
                              SeededRng& rng) {
    const auto flat = sample_flat(born_probabilities(povm, rho), shots, rng);
    OutcomeRecord rec;
    rec.n_sites = 1;
    rec.radices = {povm.n_outcomes()};
    rec.outcomes.reserve(flat.size());
    for (auto f : flat) {
        rec.outcomes.push_back({static_cast<int>(f)});
    }
    return rec;
}

OutcomeRecord sample_outcomes(const ProductPovm& povm, const DensityMatrix& rho,
                              std::int64_t shots, SeededRng& rng) {
    const auto flat = sample_flat(born_probabilities(povm, rho), shots, rng);
    OutcomeRecord rec;
    rec.n_sites = povm.n_sites();
    rec.radices = povm.radices();
    rec.outcomes.reserve(flat.size());
    for (auto f : flat) {
        rec.outcomes.push_back(povm.unflatten(f));
    }
    return rec;
}

IcReport is_informationally_complete(const Povm& povm) {
    const Eigen::Index dop = povm.dim() * povm.dim();
    RMatrix frame(dop, povm.n_outcomes());
    for (int k = 0; k < povm.n_outcomes(); ++k) {
        frame.col(k) = real_coords(povm.effect(k));
    }
    Eigen::JacobiSVD<RMatrix> svd(frame);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol::kIcRankRel * sv(0)) {
            ++rank;
        }
    }
    return {rank == dop, rank};
}

IcReport is_informationally_complete(const ProductPovm& povm) {
    // The global frame matrix is the Kronecker product of the factor frame
    // matrices (up to row order), so its rank is the product of factor ranks.
    int rank = 1;
    bool ic = true;
    for (const auto& f : povm.factors()) {
        const auto rep = is_informationally_complete(f);
        rank *= rep.rank;
        ic = ic && rep.informationally_complete;
    }
    return {ic, rank};
}

}  // namespace icpovm
