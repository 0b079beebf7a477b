#include "icpovm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icpovm/numeric.hpp"

namespace icpovm {

namespace {

Matrix pauli_char(char c) {
    switch (c) {
        case 'I': return pauli_id();
        case 'X': return pauli_x();
        case 'Y': return pauli_y();
        case 'Z': return pauli_z();
        default: throw std::invalid_argument(std::string("unknown Pauli character: ") + c);
    }
}

}  // namespace

Matrix PauliSum::to_matrix() const {
    const Eigen::Index d = Eigen::Index(1) << n_sites;
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& term : terms) {
        if (static_cast<int>(term.ops.size()) != n_sites) {
            throw std::invalid_argument("PauliSum: term length mismatch");
        }
        Matrix m = pauli_char(term.ops[0]);
        for (int q = 1; q < n_sites; ++q) {
            m = kron(m, pauli_char(term.ops[q]));
        }
        acc += term.coeff * m;
    }
    return acc;
}

OmegaTable OmegaTable::dense(RVector values, std::vector<int> radices) {
    OmegaTable t;
    t.dense_ = std::move(values);
    t.radices_ = std::move(radices);
    std::int64_t n = 1;
    for (int r : t.radices_) {
        n *= r;
    }
    if (n != t.dense_.size()) {
        throw std::invalid_argument("OmegaTable: radices do not match table size");
    }
    return t;
}

OmegaTable OmegaTable::factorized(std::vector<FactorTerm> terms, std::vector<GroupMeta> groups,
                                  std::vector<int> radices) {
    OmegaTable t;
    t.terms_ = std::move(terms);
    t.groups_ = std::move(groups);
    t.radices_ = std::move(radices);
    return t;
}

std::int64_t OmegaTable::n_outcomes() const {
    std::int64_t n = 1;
    for (int r : radices_) {
        n *= r;
    }
    return n;
}

double OmegaTable::value(const std::vector<int>& digits) const {
    if (!is_factorized()) {
        std::int64_t flat = 0;
        for (std::size_t s = 0; s < radices_.size(); ++s) {
            flat = flat * radices_[s] + digits[s];
        }
        return dense_(flat);
    }
    double total = 0.0;
    for (const auto& term : terms_) {
        double prod = term.coeff;
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            std::int64_t gflat = 0;
            for (std::size_t t = 0; t < groups_[g].sites.size(); ++t) {
                gflat = gflat * groups_[g].radices[t] + digits[groups_[g].sites[t]];
            }
            prod *= term.group_tables[g](gflat);
        }
        total += prod;
    }
    return total;
}

double OmegaTable::value(std::int64_t flat) const {
    if (!is_factorized()) {
        return dense_(flat);
    }
    std::vector<int> digits(radices_.size());
    for (int s = static_cast<int>(radices_.size()) - 1; s >= 0; --s) {
        digits[s] = static_cast<int>(flat % radices_[s]);
        flat /= radices_[s];
    }
    return value(digits);
}

RVector OmegaTable::to_dense() const {
    const std::int64_t n = n_outcomes();
    RVector out(n);
    for (std::int64_t k = 0; k < n; ++k) {
        out(k) = value(k);
    }
    return out;
}

namespace {

/// Maps a matrix over ascending sites into slot order `site_order`.
Matrix to_site_order(const Matrix& m, const std::vector<int>& site_order) {
    const int n = static_cast<int>(site_order.size());
    if (std::is_sorted(site_order.begin(), site_order.end())) {
        return m;
    }
    const Eigen::Index dim = m.rows();
    std::vector<Eigen::Index> perm(dim);
    for (Eigen::Index g = 0; g < dim; ++g) {
        Eigen::Index natural = 0;
        for (int t = 0; t < n; ++t) {
            const Eigen::Index bit = (g >> (n - 1 - t)) & 1;
            natural |= bit << (n - 1 - site_order[t]);
        }
        perm[g] = natural;
    }
    Matrix out(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            out(i, j) = m(perm[i], perm[j]);
        }
    }
    return out;
}

/// Partial contraction of the leading block index: given X of dim A*R and a of
/// dim A, returns sum_{i,l} a(i,l) X.block(l*R, i*R).
Matrix contract_block(const Matrix& x, const Matrix& a) {
    const Eigen::Index adim = a.rows();
    const Eigen::Index r = x.rows() / adim;
    Matrix out = Matrix::Zero(r, r);
    for (Eigen::Index i = 0; i < adim; ++i) {
        for (Eigen::Index l = 0; l < adim; ++l) {
            if (a(i, l) != Cplx(0, 0)) {
                out += a(i, l) * x.block(l * r, i * r, r, r);
            }
        }
    }
    return out;
}

void omega_product_recurse(const DualFrame& duals, std::size_t group_index, const Matrix& partial,
                           std::vector<int>& digits, const std::vector<int>& radices,
                           RVector& out) {
    const auto& groups = duals.groups();
    if (group_index == groups.size()) {
        std::int64_t flat = 0;
        for (std::size_t s = 0; s < radices.size(); ++s) {
            flat = flat * radices[s] + digits[s];
        }
        out(flat) = partial(0, 0).real();
        return;
    }
    const auto& g = groups[group_index];
    for (std::size_t j = 0; j < g.duals.size(); ++j) {
        std::int64_t rem = static_cast<std::int64_t>(j);
        for (int t = static_cast<int>(g.sites.size()) - 1; t >= 0; --t) {
            digits[g.sites[t]] = static_cast<int>(rem % g.radices[t]);
            rem /= g.radices[t];
        }
        omega_product_recurse(duals, group_index + 1, contract_block(partial, g.duals[j]),
                              digits, radices, out);
    }
}

constexpr std::int64_t kMaxEnumeratedOutcomes = std::int64_t(1) << 24;

}  // namespace

OmegaTable omega_coefficients(const HermitianOperator& observable, const DualFrame& duals) {
    if (!duals.is_product()) {
        const auto& list = duals.global_duals();
        if (list.front().rows() != observable.dim()) {
            throw std::invalid_argument("omega_coefficients: dimension mismatch");
        }
        RVector values(static_cast<Eigen::Index>(list.size()));
        for (std::size_t k = 0; k < list.size(); ++k) {
            values(static_cast<Eigen::Index>(k)) = hs_inner(observable.matrix(), list[k]);
        }
        return OmegaTable::dense(std::move(values), {static_cast<int>(list.size())});
    }
    // Product form: radices per site, observable permuted once into group order,
    // then contracted group by group.
    std::vector<int> radices(duals.n_sites(), 0);
    std::vector<int> site_order;
    for (const auto& g : duals.groups()) {
        for (std::size_t t = 0; t < g.sites.size(); ++t) {
            radices[g.sites[t]] = g.radices[t];
        }
        site_order.insert(site_order.end(), g.sites.begin(), g.sites.end());
    }
    const Eigen::Index expect_dim = Eigen::Index(1) << duals.n_sites();
    if (observable.dim() != expect_dim) {
        throw std::invalid_argument("omega_coefficients: dimension mismatch");
    }
    std::int64_t n = 1;
    for (int r : radices) {
        n *= r;
    }
    if (n > kMaxEnumeratedOutcomes) {
        throw std::invalid_argument("omega_coefficients: outcome space too large to enumerate");
    }
    const Matrix obs_grouped = to_site_order(observable.matrix(), site_order);
    RVector values(n);
    std::vector<int> digits(radices.size(), 0);
    omega_product_recurse(duals, 0, obs_grouped, digits, radices, values);
    return OmegaTable::dense(std::move(values), std::move(radices));
}

OmegaTable omega_coefficients(const PauliSum& observable, const DualFrame& duals) {
    if (!duals.is_product()) {
        return omega_coefficients(HermitianOperator::symmetrized(observable.to_matrix()), duals);
    }
    if (observable.n_sites != duals.n_sites()) {
        throw std::invalid_argument("omega_coefficients: site count mismatch");
    }
    std::vector<OmegaTable::GroupMeta> metas;
    for (const auto& g : duals.groups()) {
        metas.push_back({g.sites, g.radices});
    }
    std::vector<int> radices(duals.n_sites(), 0);
    for (const auto& g : duals.groups()) {
        for (std::size_t t = 0; t < g.sites.size(); ++t) {
            radices[g.sites[t]] = g.radices[t];
        }
    }
    std::vector<OmegaTable::FactorTerm> terms;
    for (const auto& term : observable.terms) {
        if (static_cast<int>(term.ops.size()) != observable.n_sites) {
            throw std::invalid_argument("PauliSum: term length mismatch");
        }
        OmegaTable::FactorTerm ft;
        ft.coeff = term.coeff;
        for (const auto& g : duals.groups()) {
            Matrix pauli_block = pauli_char(term.ops[g.sites[0]]);
            for (std::size_t t = 1; t < g.sites.size(); ++t) {
                pauli_block = kron(pauli_block, pauli_char(term.ops[g.sites[t]]));
            }
            RVector table(static_cast<Eigen::Index>(g.duals.size()));
            for (std::size_t j = 0; j < g.duals.size(); ++j) {
                table(static_cast<Eigen::Index>(j)) = hs_inner(pauli_block, g.duals[j]);
            }
            ft.group_tables.push_back(std::move(table));
        }
        terms.push_back(std::move(ft));
    }
    return OmegaTable::factorized(std::move(terms), std::move(metas), std::move(radices));
}

double estimate_expectation(const OutcomeRecord& record, const OmegaTable& omega) {
    if (record.shots() == 0) {
        throw std::invalid_argument("estimate_expectation: empty record");
    }
    double sum = 0.0;
    for (std::int64_t s = 0; s < record.shots(); ++s) {
        sum += omega.value(record.outcomes[s]);
    }
    return sum / static_cast<double>(record.shots());
}

namespace {

double ssv_from_tables(const RVector& probs, const RVector& omegas, double mean_obs) {
    double second = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
        second += probs(k) * omegas(k) * omegas(k);
    }
    double ssv = second - mean_obs * mean_obs;
    if (ssv < 0.0) {
        if (ssv < -tol::kLinearSolve) {
            throw std::runtime_error("exact_ssv: negative variance beyond tolerance");
        }
        ssv = 0.0;
    }
    return ssv;
}

}  // namespace

double exact_ssv(const Povm& povm, const DualFrame& duals, const HermitianOperator& observable,
                 const DensityMatrix& rho) {
    if (povm.dim() != rho.dim() || povm.dim() != observable.dim()) {
        throw std::invalid_argument("exact_ssv: dimension mismatch");
    }
    const RVector probs = born_probabilities(povm, rho);
    const OmegaTable omega = omega_coefficients(observable, duals);
    if (omega.n_outcomes() != povm.n_outcomes()) {
        throw std::invalid_argument("exact_ssv: outcome count mismatch");
    }
    const double mean = hs_inner(rho.matrix(), observable.matrix());
    return ssv_from_tables(probs, omega.to_dense(), mean);
}

double exact_ssv(const ProductPovm& povm, const DualFrame& duals,
                 const HermitianOperator& observable, const DensityMatrix& rho) {
    if (povm.dim() != rho.dim() || povm.dim() != observable.dim()) {
        throw std::invalid_argument("exact_ssv: dimension mismatch");
    }
    if (povm.n_outcomes() > kMaxEnumeratedOutcomes) {
        throw std::invalid_argument("exact_ssv: outcome space too large; use sample_ssv");
    }
    const RVector probs = born_probabilities(povm, rho);
    OmegaTable omega = duals.is_product()
                           ? omega_coefficients(observable, duals)
                           : OmegaTable::dense(
                                 [&] {
                                     const auto& list = duals.global_duals();
                                     RVector v(static_cast<Eigen::Index>(list.size()));
                                     for (std::size_t k = 0; k < list.size(); ++k) {
                                         v(static_cast<Eigen::Index>(k)) =
                                             hs_inner(observable.matrix(), list[k]);
                                     }
                                     return v;
                                 }(),
                                 povm.radices());
    const double mean = hs_inner(rho.matrix(), observable.matrix());
    return ssv_from_tables(probs, omega.to_dense(), mean);
}

double sample_ssv(const OutcomeRecord& record, const OmegaTable& omega) {
    const std::int64_t s = record.shots();
    if (s < 2) {
        throw std::invalid_argument("sample_ssv: need at least two shots");
    }
    double mean = 0.0;
    for (std::int64_t i = 0; i < s; ++i) {
        mean += omega.value(record.outcomes[i]);
    }
    mean /= static_cast<double>(s);
    double acc = 0.0;
    for (std::int64_t i = 0; i < s; ++i) {
        const double d = omega.value(record.outcomes[i]) - mean;
        acc += d * d;
    }
    return acc / static_cast<double>(s - 1);
}

double eigenbasis_lower_bound(const HermitianOperator& observable, const DensityMatrix& rho) {
    if (observable.dim() != rho.dim()) {
        throw std::invalid_argument("eigenbasis_lower_bound: dimension mismatch");
    }
    const double second = hs_inner(rho.matrix(), (observable.matrix() * observable.matrix()).eval());
    const double mean = hs_inner(rho.matrix(), observable.matrix());
    return std::max(second - mean * mean, 0.0);
}

double estimator_variance(double exact_ssv_value, std::int64_t shots) {
    if (shots < 1) {
        throw std::invalid_argument("estimator_variance: shots must be >= 1");
    }
    return exact_ssv_value / static_cast<double>(shots);
}

}  // namespace icpovm
