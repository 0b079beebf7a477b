#pragma once

#include <map>
#include <vector>

#include "icpovm/frames.hpp"
#include "icpovm/partition.hpp"
#include "icpovm/povm.hpp"

namespace icpovm {

/// Per-group outcome probability tables over a partition; the model
/// probability of a global outcome is the product of its group entries.
/// Group tables are row-major over each group's sorted sites.
class FrequencyModel {
  public:
    FrequencyModel(Partition partition, std::vector<RVector> tables,
                   std::vector<int> site_radices, double s_bias, std::int64_t shots_used);

    const Partition& partition() const { return partition_; }
    const std::vector<RVector>& tables() const { return tables_; }
    const std::vector<int>& site_radices() const { return site_radices_; }
    double s_bias() const { return s_bias_; }
    std::int64_t shots_used() const { return shots_used_; }

    /// Model probability of a global outcome (digits per site).
    double probability(const std::vector<int>& digits) const;

  private:
    Partition partition_;
    std::vector<RVector> tables_;
    std::vector<int> site_radices_;
    double s_bias_ = 0.0;
    std::int64_t shots_used_ = 0;
};

/// Symmetric nonnegative pairwise mutual information with zero diagonal.
class MutualInfoMatrix {
  public:
    explicit MutualInfoMatrix(RMatrix entries);

    int n_sites() const { return static_cast<int>(entries_.rows()); }
    double operator()(int i, int j) const { return entries_(i, j); }
    const RMatrix& entries() const { return entries_; }

  private:
    RMatrix entries_;
};

// --- frequencies ---------------------------------------------------------------

/// f_k = #k / S over observed flat outcomes; unobserved outcomes are absent
/// (implicitly zero).
std::map<std::int64_t, double> empirical_frequencies(const OutcomeRecord& record);

/// Biased empirical frequencies over the full outcome space:
/// (#k + Tr[M_k / d] S_bias) / (S + S_bias). S may be zero.
RVector biased_frequencies(const OutcomeRecord& record, const ProductPovm& povm, double s_bias);
RVector biased_frequencies(const OutcomeRecord& record, const Povm& povm, double s_bias);

/// Exact per-group marginals of a dense global distribution.
FrequencyModel marginalize(const RVector& frequencies, const std::vector<int>& radices,
                           const Partition& partition);

/// Frequency model with group-level bias, counted directly from per-group
/// marginal counts: table_j = (#j + Tr[M_j / 2^m] S_bias) / (S + S_bias).
FrequencyModel biased_model(const OutcomeRecord& record, const ProductPovm& povm,
                            const Partition& partition, double s_bias);

/// Degrees of freedom of a partitioned frequency model:
/// sum over groups of (n^{|group|} - 1). The default S_bias choice.
double model_degrees_of_freedom(const ProductPovm& povm, const Partition& partition);

// --- mutual information ----------------------------------------------------------

/// I(i, j) = sum f_ij log(f_ij / (f_i f_j)), natural log, 0 log(0/x) := 0.
double mutual_information(const RVector& frequencies, const std::vector<int>& radices, int i,
                          int j);
double mutual_information(const OutcomeRecord& record, int i, int j);

MutualInfoMatrix mutual_info_matrix(const RVector& frequencies, const std::vector<int>& radices);
MutualInfoMatrix mutual_info_matrix(const OutcomeRecord& record);

// --- partitioning -----------------------------------------------------------------

/// C(Lambda) = sum over groups of sum over ordered pairs j != k of I(j, k).
/// (Ordered pairs double-count each unordered pair; halving would rescale all
/// costs without changing the argmax.)
double partition_cost(const Partition& partition, const MutualInfoMatrix& mi);

enum class PartitionSearch { Exhaustive, Greedy };

/// Exhaustive: argmax of partition_cost over all partitions with group sizes
/// <= m_max (N <= 8). Greedy: merge pairs by descending I while the merged
/// size stays within m_max; ties break toward lower site indices.
Partition best_partition(const MutualInfoMatrix& mi, int m_max, PartitionSearch mode);

// --- empirical duals ----------------------------------------------------------------

/// Product weighted duals with per-group weights 1/f-tilde. All model entries
/// must be positive (use s_bias > 0).
DualFrame empirical_dual_frame(const ProductPovm& povm, const FrequencyModel& model);

}  // namespace icpovm
