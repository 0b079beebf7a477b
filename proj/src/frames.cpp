#include "icpovm/frames.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "icpovm/numeric.hpp"

namespace icpovm {

WeightVector::WeightVector(RVector values) : values_(std::move(values)) {
    if (values_.size() == 0) {
        throw std::invalid_argument("WeightVector: empty");
    }
    const double sum = values_.sum();
    if (sum > tol::kProbabilityFloor) {
        values_ *= static_cast<double>(values_.size()) / sum;
    }
}

WeightVector WeightVector::ones(Eigen::Index n) {
    return WeightVector(RVector::Ones(n));
}

FrameSuperoperator::FrameSuperoperator(Matrix mat, std::optional<WeightVector> weights)
    : mat_(std::move(mat)), weights_(std::move(weights)) {}

FrameSuperoperator frame_superoperator(const Povm& povm, std::optional<WeightVector> weights) {
    const int n = povm.n_outcomes();
    if (weights && weights->size() != n) {
        throw std::invalid_argument("frame_superoperator: weight length mismatch");
    }
    const Eigen::Index dop = povm.dim() * povm.dim();
    Matrix f = Matrix::Zero(dop, dop);
    for (int k = 0; k < n; ++k) {
        const CVector v = vectorize(povm.effect(k));
        const double a = weights ? weights->values()(k) : 1.0;
        f += a * (v * v.adjoint());
    }
    return FrameSuperoperator(std::move(f), std::move(weights));
}

const char* provenance_name(DualProvenance p) {
    switch (p) {
        case DualProvenance::Canonical: return "canonical";
        case DualProvenance::Weighted: return "weighted";
        case DualProvenance::Optimal: return "optimal";
        case DualProvenance::AverageOptimal: return "average-optimal";
        case DualProvenance::Empirical: return "empirical";
        case DualProvenance::Svd: return "svd";
    }
    return "unknown";
}

std::int64_t DualGroup::flatten(const std::vector<int>& outcome_digits) const {
    std::int64_t flat = 0;
    for (std::size_t t = 0; t < sites.size(); ++t) {
        flat = flat * radices[t] + outcome_digits[t];
    }
    return flat;
}

DualFrame DualFrame::global(std::vector<Matrix> duals, DualProvenance prov) {
    DualFrame f;
    f.provenance_ = prov;
    f.n_sites_ = 1;
    f.global_ = std::move(duals);
    return f;
}

DualFrame DualFrame::product(std::vector<DualGroup> groups, int n_sites, DualProvenance prov) {
    DualFrame f;
    f.provenance_ = prov;
    f.n_sites_ = n_sites;
    f.groups_ = std::move(groups);
    return f;
}

const std::vector<Matrix>& DualFrame::global_duals() const {
    if (is_product()) {
        throw std::logic_error("DualFrame: product form has no global dual list");
    }
    return global_;
}

const std::vector<DualGroup>& DualFrame::groups() const {
    if (!is_product()) {
        throw std::logic_error("DualFrame: global form has no groups");
    }
    return groups_;
}

std::int64_t DualFrame::n_outcomes() const {
    if (!is_product()) {
        return static_cast<std::int64_t>(global_.size());
    }
    std::int64_t n = 1;
    for (const auto& g : groups_) {
        n *= static_cast<std::int64_t>(g.duals.size());
    }
    return n;
}

Matrix reorder_sites(const Matrix& m, const std::vector<int>& site_order) {
    const int n = static_cast<int>(site_order.size());
    bool already_sorted = std::is_sorted(site_order.begin(), site_order.end());
    if (already_sorted) {
        return m;
    }
    const Eigen::Index dim = m.rows();
    std::vector<Eigen::Index> perm(dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
        Eigen::Index target = 0;
        for (int t = 0; t < n; ++t) {
            const Eigen::Index bit = (b >> (n - 1 - t)) & 1;
            target |= bit << (n - 1 - site_order[t]);
        }
        perm[b] = target;
    }
    Matrix out(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            out(perm[i], perm[j]) = m(i, j);
        }
    }
    return out;
}

Matrix DualFrame::dual(const std::vector<int>& outcome_digits,
                       const std::vector<int>& radices) const {
    if (!is_product()) {
        std::int64_t flat = 0;
        for (std::size_t s = 0; s < outcome_digits.size(); ++s) {
            flat = flat * radices[s] + outcome_digits[s];
        }
        return global_.at(flat);
    }
    Matrix acc;
    std::vector<int> site_order;
    for (const auto& g : groups_) {
        std::vector<int> digits(g.sites.size());
        for (std::size_t t = 0; t < g.sites.size(); ++t) {
            digits[t] = outcome_digits.at(g.sites[t]);
        }
        const Matrix& d = g.duals.at(g.flatten(digits));
        acc = (acc.size() == 0) ? d : kron(acc, d);
        site_order.insert(site_order.end(), g.sites.begin(), g.sites.end());
    }
    return reorder_sites(acc, site_order);
}

Matrix DualFrame::dual(int k) const {
    if (is_product()) {
        throw std::logic_error("DualFrame: use the outcome-tuple overload for product frames");
    }
    return global_.at(k);
}

namespace {

struct RealFrame {
    RMatrix m;  // d_op x n, columns real_coords(M_k)
};

RealFrame real_frame(const std::vector<Matrix>& effects) {
    const Eigen::Index dop = effects.front().rows() * effects.front().rows();
    RMatrix m(dop, static_cast<Eigen::Index>(effects.size()));
    for (std::size_t k = 0; k < effects.size(); ++k) {
        m.col(static_cast<Eigen::Index>(k)) = real_coords(effects[k]);
    }
    return {std::move(m)};
}

/// Solves d_k = alpha_k F_alpha^{-1} m_k over real coordinates. Throws
/// IcFailure when F_alpha is singular or too ill-conditioned.
std::vector<Matrix> solve_weighted_duals(const std::vector<Matrix>& effects, const RVector& alpha,
                                         const char* context, double* condition_out = nullptr) {
    if (static_cast<Eigen::Index>(effects.size()) != alpha.size()) {
        throw std::invalid_argument(std::string(context) + ": weight length mismatch");
    }
    const RealFrame frame = real_frame(effects);
    const RMatrix f = frame.m * alpha.asDiagonal() * frame.m.transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(f);
    const RVector evals = es.eigenvalues();
    const double lmax = evals.cwiseAbs().maxCoeff();
    const double lmin = evals.cwiseAbs().minCoeff();
    if (condition_out != nullptr) {
        *condition_out = (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
    }
    if (!(lmin > 0.0) || lmax / lmin > tol::kConditionLimit) {
        throw IcFailure(std::string(context) +
                        ": frame superoperator singular or ill-conditioned (POVM not IC?)");
    }
    const RMatrix finv =
        es.eigenvectors() * evals.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    const RMatrix rhs = frame.m * alpha.asDiagonal();
    RMatrix duals_real = finv * rhs;
    // iterative refinement keeps the duality identity near machine precision
    // even for ill-scaled weights
    for (int pass = 0; pass < 2; ++pass) {
        duals_real += finv * (rhs - f * duals_real);
    }
    std::vector<Matrix> duals(effects.size());
    for (std::size_t k = 0; k < effects.size(); ++k) {
        duals[k] = from_real_coords(duals_real.col(static_cast<Eigen::Index>(k)));
    }
    return duals;
}

}  // namespace

DualFrame weighted_duals(const Povm& povm, const WeightVector& weights) {
    auto duals = solve_weighted_duals(povm.effects(), weights.values(), "weighted_duals");
    return DualFrame::global(std::move(duals), DualProvenance::Weighted);
}

DualFrame canonical_duals(const Povm& povm) {
    auto duals =
        solve_weighted_duals(povm.effects(), RVector::Ones(povm.n_outcomes()), "canonical_duals");
    return DualFrame::global(std::move(duals), DualProvenance::Canonical);
}

DualFrame optimal_duals(const Povm& povm, const DensityMatrix& rho, double floor) {
    if (!(floor > 0.0)) {
        throw std::invalid_argument("optimal_duals: floor must be positive");
    }
    const RVector p = born_probabilities(povm, rho);
    RVector alpha(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        alpha(k) = 1.0 / std::max(p(k), floor);
    }
    auto duals =
        solve_weighted_duals(povm.effects(), WeightVector(alpha).values(), "optimal_duals");
    return DualFrame::global(std::move(duals), DualProvenance::Optimal);
}

DualFrame average_optimal_duals(const Povm& povm) {
    RVector alpha(povm.n_outcomes());
    for (int k = 0; k < povm.n_outcomes(); ++k) {
        const double tr = povm.effect(k).trace().real();
        if (!(tr > 0.0)) {
            throw std::invalid_argument("average_optimal_duals: zero-trace effect");
        }
        alpha(k) = 1.0 / tr;
    }
    auto duals = solve_weighted_duals(povm.effects(), WeightVector(alpha).values(),
                                      "average_optimal_duals");
    return DualFrame::global(std::move(duals), DualProvenance::AverageOptimal);
}

namespace {

DualFrame product_duals_from_site_weights(const ProductPovm& povm,
                                          const std::vector<RVector>& site_weights,
                                          DualProvenance prov) {
    Partition singles = Partition::singletons(povm.n_sites());
    DualFrame f = product_weighted_duals(povm, singles, site_weights);
    return DualFrame::product(std::vector<DualGroup>(f.groups()), povm.n_sites(), prov);
}

}  // namespace

DualFrame canonical_duals(const ProductPovm& povm) {
    std::vector<RVector> w;
    for (const auto& factor : povm.factors()) {
        w.push_back(RVector::Ones(factor.n_outcomes()));
    }
    return product_duals_from_site_weights(povm, w, DualProvenance::Canonical);
}

DualFrame average_optimal_duals(const ProductPovm& povm) {
    std::vector<RVector> w;
    for (const auto& factor : povm.factors()) {
        RVector alpha(factor.n_outcomes());
        for (int k = 0; k < factor.n_outcomes(); ++k) {
            const double tr = factor.effect(k).trace().real();
            if (!(tr > 0.0)) {
                throw std::invalid_argument("average_optimal_duals: zero-trace effect");
            }
            alpha(k) = 1.0 / tr;
        }
        w.push_back(std::move(alpha));
    }
    return product_duals_from_site_weights(povm, w, DualProvenance::AverageOptimal);
}

DualFrame optimal_duals(const ProductPovm& povm, const DensityMatrix& rho, double floor) {
    if (!(floor > 0.0)) {
        throw std::invalid_argument("optimal_duals: floor must be positive");
    }
    const RVector p = born_probabilities(povm, rho);
    RVector alpha(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        alpha(k) = 1.0 / std::max(p(k), floor);
    }
    const Povm flat = povm.materialize();
    auto duals = solve_weighted_duals(flat.effects(), WeightVector(alpha).values(),
                                      "optimal_duals");
    return DualFrame::global(std::move(duals), DualProvenance::Optimal);
}

FrameSvd frame_svd(const Povm& povm) {
    const RealFrame frame = real_frame(povm.effects());
    Eigen::JacobiSVD<RMatrix> svd(frame.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    FrameSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    const Eigen::Index dop = out.u.cols();
    const Eigen::Index n = out.v.rows();
    for (Eigen::Index i = 0; i < dop; ++i) {
        Eigen::Index at;
        out.u.col(i).cwiseAbs().maxCoeff(&at);
        if (out.u(at, i) < 0) {
            out.u.col(i) = -out.u.col(i);
            if (i < n) {
                out.v.col(i) = -out.v.col(i);
            }
        }
    }
    for (Eigen::Index i = dop; i < n; ++i) {
        Eigen::Index at;
        out.v.col(i).cwiseAbs().maxCoeff(&at);
        if (out.v(at, i) < 0) {
            out.v.col(i) = -out.v.col(i);
        }
    }
    return out;
}

DualFrame svd_duals(const Povm& povm, const SvdDualParams& params) {
    const int n = povm.n_outcomes();
    const Eigen::Index dop = povm.dim() * povm.dim();
    const FrameSvd svd = frame_svd(povm);
    if (!(svd.sigma.minCoeff() > 0.0) ||
        svd.sigma.maxCoeff() / svd.sigma.minCoeff() > tol::kConditionLimit) {
        throw IcFailure("svd_duals: POVM not informationally complete");
    }
    if (params.free_matrix.size() != 0 &&
        (params.free_matrix.rows() != dop || params.free_matrix.cols() != n - dop)) {
        throw std::invalid_argument("svd_duals: free matrix must be d_op x (n - d_op)");
    }
    RMatrix lambda = RMatrix::Zero(dop, n);
    for (Eigen::Index i = 0; i < dop; ++i) {
        lambda(i, i) = 1.0 / svd.sigma(i);
    }
    if (params.free_matrix.size() != 0) {
        lambda.rightCols(n - dop) = params.free_matrix;
    }
    const RMatrix duals_real = svd.u * lambda * svd.v.transpose();
    std::vector<Matrix> duals(n);
    for (int k = 0; k < n; ++k) {
        duals[k] = from_real_coords(duals_real.col(k));
    }
    return DualFrame::global(std::move(duals), DualProvenance::Svd);
}

std::pair<double, double> frame_bounds(const std::vector<Matrix>& frame_ops) {
    const RealFrame frame = real_frame(frame_ops);
    const RMatrix f = frame.m * frame.m.transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(f, Eigen::EigenvaluesOnly);
    const double a = es.eigenvalues().minCoeff();
    const double b = es.eigenvalues().maxCoeff();
    if (!(a > tol::kIcRankRel * b)) {
        throw IcFailure("frame_bounds: lower frame bound vanishes (frame does not span)");
    }
    return {a, b};
}

std::pair<double, double> frame_bounds(const Povm& povm) {
    return frame_bounds(povm.effects());
}

namespace {

DualFrame product_weighted_duals_impl(const ProductPovm& povm, const Partition& partition,
                                      const std::vector<RVector>& group_weights,
                                      double* condition_out) {
    Partition part = partition;
    part.validate(povm.n_sites());
    if (group_weights.size() != part.groups.size()) {
        throw std::invalid_argument("product_weighted_duals: one weight table per group required");
    }
    constexpr int kMaxGroupSize = 6;
    std::vector<DualGroup> groups;
    for (std::size_t gi = 0; gi < part.groups.size(); ++gi) {
        const auto& sites = part.groups[gi];
        if (static_cast<int>(sites.size()) > kMaxGroupSize) {
            throw std::invalid_argument("product_weighted_duals: group too large");
        }
        std::vector<int> radices;
        std::int64_t n_group = 1;
        for (int q : sites) {
            radices.push_back(povm.factor(q).n_outcomes());
            n_group *= radices.back();
        }
        if (group_weights[gi].size() != n_group) {
            throw std::invalid_argument("product_weighted_duals: weight table length mismatch");
        }
        // Materialize the group's effects (kron over the group's sorted sites).
        std::vector<Matrix> effects(n_group);
        for (std::int64_t flat = 0; flat < n_group; ++flat) {
            std::int64_t rem = flat;
            std::vector<int> digits(sites.size());
            for (int t = static_cast<int>(sites.size()) - 1; t >= 0; --t) {
                digits[t] = static_cast<int>(rem % radices[t]);
                rem /= radices[t];
            }
            Matrix acc = povm.factor(sites[0]).effect(digits[0]);
            for (std::size_t t = 1; t < sites.size(); ++t) {
                acc = kron(acc, povm.factor(sites[t]).effect(digits[t]));
            }
            effects[flat] = std::move(acc);
        }
        double cond = 0.0;
        auto duals = solve_weighted_duals(effects, WeightVector(group_weights[gi]).values(),
                                          "product_weighted_duals", &cond);
        if (condition_out != nullptr) {
            *condition_out = std::max(*condition_out, cond);
        }
        groups.push_back(DualGroup{sites, std::move(radices), std::move(duals)});
    }
    return DualFrame::product(std::move(groups), povm.n_sites(), DualProvenance::Weighted);
}

}  // namespace

DualFrame product_weighted_duals(const ProductPovm& povm, const Partition& partition,
                                 const std::vector<RVector>& group_weights) {
    return product_weighted_duals_impl(povm, partition, group_weights, nullptr);
}

WeightedSolve weighted_duals_info(const Povm& povm, const WeightVector& weights) {
    double cond = 0.0;
    auto duals = solve_weighted_duals(povm.effects(), weights.values(), "weighted_duals", &cond);
    return {DualFrame::global(std::move(duals), DualProvenance::Weighted), cond};
}

WeightedSolve product_weighted_duals_info(const ProductPovm& povm, const Partition& partition,
                                          const std::vector<RVector>& group_weights) {
    double cond = 0.0;
    DualFrame duals = product_weighted_duals_impl(povm, partition, group_weights, &cond);
    return {std::move(duals), cond};
}

double duality_defect(const Povm& povm, const DualFrame& duals) {
    const Eigen::Index dop = povm.dim() * povm.dim();
    RMatrix t = RMatrix::Zero(dop, dop);
    const int n = povm.n_outcomes();
    if (!duals.is_product() && duals.n_outcomes() != n) {
        throw std::invalid_argument("duality_defect: outcome count mismatch");
    }
    std::vector<int> radices = {n};
    for (int k = 0; k < n; ++k) {
        const Matrix dk = duals.is_product() ? duals.dual(std::vector<int>{k}, radices)
                                             : duals.dual(k);
        t += real_coords(dk) * real_coords(povm.effect(k)).transpose();
    }
    return (t - RMatrix::Identity(dop, dop)).norm();
}

double duality_defect(const ProductPovm& povm, const DualFrame& duals) {
    const std::int64_t n = povm.n_outcomes();
    if (n > (std::int64_t(1) << 16)) {
        throw std::invalid_argument("duality_defect: outcome space too large to enumerate");
    }
    const Eigen::Index dop = povm.dim() * povm.dim();
    const auto radices = povm.radices();
    RMatrix t = RMatrix::Zero(dop, dop);
    for (std::int64_t k = 0; k < n; ++k) {
        const auto digits = povm.unflatten(k);
        const Matrix dk = duals.is_product() ? duals.dual(digits, radices)
                                             : duals.dual(static_cast<int>(k));
        t += real_coords(dk) * real_coords(povm.materialize_effect(digits)).transpose();
    }
    return (t - RMatrix::Identity(dop, dop)).norm();
}

}  // namespace icpovm
