#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icpovm/frames.hpp"
#include "icpovm/operators.hpp"
#include "icpovm/povm.hpp"

namespace icpovm {

/// Observable as a weighted sum of Pauli strings ("XZIY" style, one character
/// per site). Enables group-factorized omega evaluation for product duals.
struct PauliTerm {
    std::string ops;
    double coeff = 0.0;
};

struct PauliSum {
    int n_sites = 0;
    std::vector<PauliTerm> terms;

    Matrix to_matrix() const;
};

/// Table of omega_k = Tr[O D_k], either dense over global flat outcomes or
/// factorized as sum-of-products over the dual frame's groups.
class OmegaTable {
  public:
    struct GroupMeta {
        std::vector<int> sites;
        std::vector<int> radices;
    };
    struct FactorTerm {
        double coeff = 0.0;
        std::vector<RVector> group_tables;
    };

    static OmegaTable dense(RVector values, std::vector<int> radices);
    static OmegaTable factorized(std::vector<FactorTerm> terms, std::vector<GroupMeta> groups,
                                 std::vector<int> radices);

    bool is_factorized() const { return !terms_.empty() || dense_.size() == 0; }
    const std::vector<int>& radices() const { return radices_; }
    std::int64_t n_outcomes() const;

    double value(std::int64_t flat) const;
    double value(const std::vector<int>& digits) const;

    /// Materializes the full table in global flat order.
    RVector to_dense() const;

  private:
    RVector dense_;
    std::vector<FactorTerm> terms_;
    std::vector<GroupMeta> groups_;
    std::vector<int> radices_;
};

// --- omega coefficients -------------------------------------------------------

/// Global duals: omega_k = Tr[O D_k] per outcome. Product duals: the dense
/// table is built by contracting O group by group, never materializing the
/// 2^N x 2^N dual operators.
OmegaTable omega_coefficients(const HermitianOperator& observable, const DualFrame& duals);

/// Factorized table for a Pauli-sum observable and product-form duals.
OmegaTable omega_coefficients(const PauliSum& observable, const DualFrame& duals);

// --- estimators ----------------------------------------------------------------

/// Monte-Carlo mean of omega over the recorded outcomes.
double estimate_expectation(const OutcomeRecord& record, const OmegaTable& omega);

/// Single-shot variance sum_k p_k omega_k^2 - <O>_rho^2 by exact summation
/// over all outcomes.
double exact_ssv(const Povm& povm, const DualFrame& duals, const HermitianOperator& observable,
                 const DensityMatrix& rho);
double exact_ssv(const ProductPovm& povm, const DualFrame& duals,
                 const HermitianOperator& observable, const DensityMatrix& rho);

/// Corrected (S-1 denominator) sample variance of omega over the record.
double sample_ssv(const OutcomeRecord& record, const OmegaTable& omega);

/// Tr[rho O^2] - Tr[rho O]^2: the SSV of the eigenbasis projective
/// measurement, a lower bound for every POVM/dual estimator.
double eigenbasis_lower_bound(const HermitianOperator& observable, const DensityMatrix& rho);

/// exact_ssv / shots: the variance of the S-shot mean estimator.
double estimator_variance(double exact_ssv_value, std::int64_t shots);

}  // namespace icpovm
