#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "icpovm/operators.hpp"
#include "icpovm/partition.hpp"
#include "icpovm/povm.hpp"

namespace icpovm {

/// Outcome weights alpha_k of the weighted frame superoperator. Positive
/// vectors are stored rescaled to sum to n (the duals are invariant under
/// uniform rescaling); vectors with non-positive sum are kept as given.
class WeightVector {
  public:
    explicit WeightVector(RVector values);
    static WeightVector ones(Eigen::Index n);

    Eigen::Index size() const { return values_.size(); }
    const RVector& values() const { return values_; }
    bool all_positive() const { return values_.minCoeff() > 0.0; }

  private:
    RVector values_;
};

/// The d^2 x d^2 double-ket matrix of F_alpha = sum_k alpha_k |M_k>><<M_k|.
class FrameSuperoperator {
  public:
    FrameSuperoperator(Matrix mat, std::optional<WeightVector> weights);

    Eigen::Index dim_op() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }
    const std::optional<WeightVector>& weights() const { return weights_; }

  private:
    Matrix mat_;
    std::optional<WeightVector> weights_;
};

FrameSuperoperator frame_superoperator(const Povm& povm,
                                       std::optional<WeightVector> weights = std::nullopt);

enum class DualProvenance { Canonical, Weighted, Optimal, AverageOptimal, Empirical, Svd };

const char* provenance_name(DualProvenance p);

/// One tensor factor of a product-form dual frame: the duals for all outcome
/// tuples of the sites in `sites` (flat index is row-major over the sorted
/// site list).
struct DualGroup {
    std::vector<int> sites;
    std::vector<int> radices;
    std::vector<Matrix> duals;

    std::int64_t flatten(const std::vector<int>& outcome_digits) const;
};

/// A dual frame {D_k}: either one dual operator per global outcome, or a
/// product form with per-group factor tables whose tensor products (in site
/// order) give the global duals.
class DualFrame {
  public:
    static DualFrame global(std::vector<Matrix> duals, DualProvenance prov);
    static DualFrame product(std::vector<DualGroup> groups, int n_sites, DualProvenance prov);

    DualProvenance provenance() const { return provenance_; }
    bool is_product() const { return !groups_.empty(); }
    int n_sites() const { return n_sites_; }

    const std::vector<Matrix>& global_duals() const;
    const std::vector<DualGroup>& groups() const;

    /// Number of global outcomes covered by this frame.
    std::int64_t n_outcomes() const;

    /// Materialized dual operator for a global outcome (product form: tensor
    /// of group duals reordered to ascending site order).
    Matrix dual(const std::vector<int>& outcome_digits, const std::vector<int>& radices) const;
    Matrix dual(int k) const;

  private:
    DualProvenance provenance_ = DualProvenance::Canonical;
    int n_sites_ = 1;
    std::vector<Matrix> global_;
    std::vector<DualGroup> groups_;
};

// --- dual-frame constructions ------------------------------------------------

/// |D_k>> = alpha_k F_alpha^{-1} |M_k>>. Throws IcFailure when F_alpha is
/// singular or has condition number above 1e12.
DualFrame weighted_duals(const Povm& povm, const WeightVector& weights);
DualFrame canonical_duals(const Povm& povm);

/// Weights 1/max(Tr[rho M_k], floor); the SSV-optimal duals for known rho.
DualFrame optimal_duals(const Povm& povm, const DensityMatrix& rho, double floor = 1e-12);

/// Weights 1/Tr[M_k]; the classical-shadow inverse-channel duals.
DualFrame average_optimal_duals(const Povm& povm);

// Convenience overloads on product POVMs. Canonical and average-optimal
// weights factorize, so these return product-form frames; optimal duals do
// not factorize and are returned as a global frame over the materialized POVM.
DualFrame canonical_duals(const ProductPovm& povm);
DualFrame average_optimal_duals(const ProductPovm& povm);
DualFrame optimal_duals(const ProductPovm& povm, const DensityMatrix& rho, double floor = 1e-12);

/// Real SVD data of the frame matrix [real_coords(M_1) ... real_coords(M_n)],
/// with each left singular vector's largest-magnitude entry fixed positive.
struct FrameSvd {
    RMatrix u;       // d_op x d_op
    RVector sigma;   // d_op singular values, descending
    RMatrix v;       // n x n
};

FrameSvd frame_svd(const Povm& povm);

/// Free block s of the Appendix-D dual parametrization; d_op x (n - d_op)
/// (empty for minimally IC POVMs).
struct SvdDualParams {
    RMatrix free_matrix;
};

/// D = U [diag(1/sigma) | s] V^T column-wise. s = 0 gives the canonical duals.
DualFrame svd_duals(const Povm& povm, const SvdDualParams& params);

/// Tightest frame bounds (A, B): extreme eigenvalues of the canonical frame
/// superoperator. Throws IcFailure when A vanishes numerically. The general
/// overload accepts any finite set of Hermitian operators.
std::pair<double, double> frame_bounds(const Povm& povm);
std::pair<double, double> frame_bounds(const std::vector<Matrix>& frame_ops);

/// Per-group weighted duals: group weight table j -> alpha_j, one table per
/// partition group (flat index row-major over the group's sorted sites).
/// The global dual of outcome k is the tensor product of its group duals.
DualFrame product_weighted_duals(const ProductPovm& povm, const Partition& partition,
                                 const std::vector<RVector>& group_weights);

/// Dual solve together with the frame-superoperator condition number (max
/// over groups for product form); used by the optimizer's conditioning
/// barrier.
struct WeightedSolve {
    DualFrame duals;
    double condition = 0.0;
};

WeightedSolve weighted_duals_info(const Povm& povm, const WeightVector& weights);
WeightedSolve product_weighted_duals_info(const ProductPovm& povm, const Partition& partition,
                                          const std::vector<RVector>& group_weights);

// --- verification helpers ----------------------------------------------------

/// Frobenius norm of sum_k |D_k>><<M_k| minus the identity superoperator.
double duality_defect(const Povm& povm, const DualFrame& duals);
double duality_defect(const ProductPovm& povm, const DualFrame& duals);

/// Reorders a 2^N x 2^N matrix given over `site_order` into ascending site
/// order.
Matrix reorder_sites(const Matrix& m, const std::vector<int>& site_order);

}  // namespace icpovm
