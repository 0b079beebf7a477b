#include "icpovm/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "icpovm/numeric.hpp"

namespace icpovm {

FrequencyModel::FrequencyModel(Partition partition, std::vector<RVector> tables,
                               std::vector<int> site_radices, double s_bias,
                               std::int64_t shots_used)
    : partition_(std::move(partition)),
      tables_(std::move(tables)),
      site_radices_(std::move(site_radices)),
      s_bias_(s_bias),
      shots_used_(shots_used) {
    partition_.validate(static_cast<int>(site_radices_.size()));
    if (tables_.size() != partition_.groups.size()) {
        throw std::invalid_argument("FrequencyModel: one table per group required");
    }
    for (std::size_t g = 0; g < tables_.size(); ++g) {
        std::int64_t expect = 1;
        for (int q : partition_.groups[g]) {
            expect *= site_radices_[q];
        }
        const auto& t = tables_[g];
        if (t.size() != expect) {
            throw std::invalid_argument("FrequencyModel: table size does not match group radices");
        }
        if (t.minCoeff() < 0.0) {
            throw std::invalid_argument("FrequencyModel: negative table entry");
        }
        if (std::abs(t.sum() - 1.0) > tol::kTrace) {
            throw std::invalid_argument("FrequencyModel: table does not sum to 1");
        }
        if (s_bias_ > 0.0 && !(t.minCoeff() > 0.0)) {
            throw std::invalid_argument("FrequencyModel: zero entry despite positive bias");
        }
    }
}

double FrequencyModel::probability(const std::vector<int>& digits) const {
    double p = 1.0;
    for (std::size_t g = 0; g < partition_.groups.size(); ++g) {
        std::int64_t flat = 0;
        for (int q : partition_.groups[g]) {
            flat = flat * site_radices_[q] + digits[q];
        }
        p *= tables_[g](flat);
    }
    return p;
}

MutualInfoMatrix::MutualInfoMatrix(RMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("MutualInfoMatrix: must be square");
    }
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        if (entries_(i, i) != 0.0) {
            throw std::invalid_argument("MutualInfoMatrix: diagonal must be zero");
        }
        for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
            if (std::abs(entries_(i, j) - entries_(j, i)) > 1e-12) {
                throw std::invalid_argument("MutualInfoMatrix: not symmetric");
            }
            if (entries_(i, j) < -1e-12) {
                throw std::invalid_argument("MutualInfoMatrix: negative entry");
            }
        }
    }
}

std::map<std::int64_t, double> empirical_frequencies(const OutcomeRecord& record) {
    if (record.shots() < 1) {
        throw std::invalid_argument("empirical_frequencies: empty record");
    }
    std::map<std::int64_t, double> freq;
    const double w = 1.0 / static_cast<double>(record.shots());
    for (std::int64_t s = 0; s < record.shots(); ++s) {
        freq[record.flatten(s)] += w;
    }
    return freq;
}

namespace {

RVector counts_vector(const OutcomeRecord& record, std::int64_t n) {
    RVector counts = RVector::Zero(n);
    for (std::int64_t s = 0; s < record.shots(); ++s) {
        counts(record.flatten(s)) += 1.0;
    }
    return counts;
}

void check_bias(const RVector& counts, double s_bias) {
    if (s_bias < 0.0) {
        throw std::invalid_argument("biased_frequencies: s_bias must be nonnegative");
    }
    if (s_bias == 0.0 && counts.minCoeff() == 0.0) {
        throw std::invalid_argument(
            "biased_frequencies: unobserved outcome requires a positive s_bias");
    }
}

}  // namespace

RVector biased_frequencies(const OutcomeRecord& record, const ProductPovm& povm, double s_bias) {
    const std::int64_t n = povm.n_outcomes();
    RVector counts = counts_vector(record, n);
    check_bias(counts, s_bias);
    const double d = static_cast<double>(povm.dim());
    const double denom = static_cast<double>(record.shots()) + s_bias;
    RVector out(n);
    for (std::int64_t k = 0; k < n; ++k) {
        // Tr[M_k] factorizes over sites
        const auto digits = povm.unflatten(k);
        double tr = 1.0;
        for (int q = 0; q < povm.n_sites(); ++q) {
            tr *= povm.factor(q).effect(digits[q]).trace().real();
        }
        out(k) = (counts(k) + (tr / d) * s_bias) / denom;
    }
    return out;
}

RVector biased_frequencies(const OutcomeRecord& record, const Povm& povm, double s_bias) {
    const std::int64_t n = povm.n_outcomes();
    RVector counts = counts_vector(record, n);
    check_bias(counts, s_bias);
    const double d = static_cast<double>(povm.dim());
    const double denom = static_cast<double>(record.shots()) + s_bias;
    RVector out(n);
    for (std::int64_t k = 0; k < n; ++k) {
        out(k) = (counts(k) + (povm.effect(static_cast<int>(k)).trace().real() / d) * s_bias) /
                 denom;
    }
    return out;
}

FrequencyModel marginalize(const RVector& frequencies, const std::vector<int>& radices,
                           const Partition& partition) {
    Partition part = partition;
    part.validate(static_cast<int>(radices.size()));
    std::int64_t n = 1;
    for (int r : radices) {
        n *= r;
    }
    if (n != frequencies.size()) {
        throw std::invalid_argument("marginalize: radices do not match table size");
    }
    std::vector<RVector> tables;
    for (const auto& sites : part.groups) {
        std::int64_t gn = 1;
        for (int q : sites) {
            gn *= radices[q];
        }
        tables.push_back(RVector::Zero(gn));
    }
    std::vector<int> digits(radices.size());
    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t rem = k;
        for (int s = static_cast<int>(radices.size()) - 1; s >= 0; --s) {
            digits[s] = static_cast<int>(rem % radices[s]);
            rem /= radices[s];
        }
        for (std::size_t g = 0; g < part.groups.size(); ++g) {
            std::int64_t flat = 0;
            for (int q : part.groups[g]) {
                flat = flat * radices[q] + digits[q];
            }
            tables[g](flat) += frequencies(k);
        }
    }
    return FrequencyModel(std::move(part), std::move(tables), radices, 0.0, 0);
}

FrequencyModel biased_model(const OutcomeRecord& record, const ProductPovm& povm,
                            const Partition& partition, double s_bias) {
    Partition part = partition;
    part.validate(povm.n_sites());
    if (s_bias < 0.0) {
        throw std::invalid_argument("biased_model: s_bias must be nonnegative");
    }
    const double denom = static_cast<double>(record.shots()) + s_bias;
    if (!(denom > 0.0)) {
        throw std::invalid_argument("biased_model: need shots or positive bias");
    }
    std::vector<RVector> tables;
    for (const auto& sites : part.groups) {
        std::vector<int> radices;
        std::int64_t gn = 1;
        for (int q : sites) {
            radices.push_back(povm.factor(q).n_outcomes());
            gn *= radices.back();
        }
        // group marginal counts, directly from the shots
        RVector counts = RVector::Zero(gn);
        for (std::int64_t s = 0; s < record.shots(); ++s) {
            std::int64_t flat = 0;
            for (std::size_t t = 0; t < sites.size(); ++t) {
                flat = flat * radices[t] + record.outcomes[s][sites[t]];
            }
            counts(flat) += 1.0;
        }
        // group-level bias: Tr[M_group / 2^m] factorizes over the group's sites
        RVector table(gn);
        const double gd = std::pow(2.0, double(sites.size()));
        for (std::int64_t j = 0; j < gn; ++j) {
            std::int64_t rem = j;
            double tr = 1.0;
            for (int t = static_cast<int>(sites.size()) - 1; t >= 0; --t) {
                const int digit = static_cast<int>(rem % radices[t]);
                rem /= radices[t];
                tr *= povm.factor(sites[t]).effect(digit).trace().real();
            }
            table(j) = (counts(j) + (tr / gd) * s_bias) / denom;
        }
        if (s_bias == 0.0 && table.minCoeff() == 0.0) {
            throw std::invalid_argument(
                "biased_model: unobserved group outcome requires a positive s_bias");
        }
        tables.push_back(std::move(table));
    }
    std::vector<int> site_radices;
    for (int q = 0; q < povm.n_sites(); ++q) {
        site_radices.push_back(povm.factor(q).n_outcomes());
    }
    return FrequencyModel(std::move(part), std::move(tables), std::move(site_radices), s_bias,
                          record.shots());
}

double model_degrees_of_freedom(const ProductPovm& povm, const Partition& partition) {
    double dof = 0.0;
    for (const auto& sites : partition.groups) {
        double gn = 1.0;
        for (int q : sites) {
            gn *= povm.factor(q).n_outcomes();
        }
        dof += gn - 1.0;
    }
    return dof;
}

namespace {

double mi_from_pair_table(const RMatrix& joint) {
    const RVector fi = joint.rowwise().sum();
    const RVector fj = joint.colwise().sum();
    double mi = 0.0;
    for (Eigen::Index a = 0; a < joint.rows(); ++a) {
        for (Eigen::Index b = 0; b < joint.cols(); ++b) {
            const double f = joint(a, b);
            if (f > 0.0) {
                mi += f * std::log(f / (fi(a) * fj(b)));
            }
        }
    }
    return mi;
}

}  // namespace

double mutual_information(const RVector& frequencies, const std::vector<int>& radices, int i,
                          int j) {
    if (i == j) {
        throw std::invalid_argument("mutual_information: i and j must differ");
    }
    const int n = static_cast<int>(radices.size());
    std::int64_t total = 1;
    for (int r : radices) {
        total *= r;
    }
    if (total != frequencies.size()) {
        throw std::invalid_argument("mutual_information: radices do not match table size");
    }
    RMatrix joint = RMatrix::Zero(radices[i], radices[j]);
    std::vector<int> digits(n);
    for (std::int64_t k = 0; k < total; ++k) {
        std::int64_t rem = k;
        for (int s = n - 1; s >= 0; --s) {
            digits[s] = static_cast<int>(rem % radices[s]);
            rem /= radices[s];
        }
        joint(digits[i], digits[j]) += frequencies(k);
    }
    return mi_from_pair_table(joint);
}

double mutual_information(const OutcomeRecord& record, int i, int j) {
    if (i == j) {
        throw std::invalid_argument("mutual_information: i and j must differ");
    }
    if (record.shots() < 1) {
        throw std::invalid_argument("mutual_information: empty record");
    }
    RMatrix joint = RMatrix::Zero(record.radices[i], record.radices[j]);
    const double w = 1.0 / static_cast<double>(record.shots());
    for (const auto& o : record.outcomes) {
        joint(o[i], o[j]) += w;
    }
    return mi_from_pair_table(joint);
}

MutualInfoMatrix mutual_info_matrix(const RVector& frequencies, const std::vector<int>& radices) {
    const int n = static_cast<int>(radices.size());
    RMatrix m = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = std::max(mutual_information(frequencies, radices, i, j), 0.0);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return MutualInfoMatrix(std::move(m));
}

MutualInfoMatrix mutual_info_matrix(const OutcomeRecord& record) {
    const int n = record.n_sites;
    RMatrix m = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = std::max(mutual_information(record, i, j), 0.0);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return MutualInfoMatrix(std::move(m));
}

double partition_cost(const Partition& partition, const MutualInfoMatrix& mi) {
    double cost = 0.0;
    for (const auto& sites : partition.groups) {
        for (int a : sites) {
            for (int b : sites) {
                if (a != b) {
                    cost += mi(a, b);
                }
            }
        }
    }
    return cost;
}

namespace {

void enumerate_partitions(int n, int m_max, int next, std::vector<std::vector<int>>& groups,
                          const std::function<void(const std::vector<std::vector<int>>&)>& visit) {
    if (next == n) {
        visit(groups);
        return;
    }
    // index-based: the recursion appends to `groups`, which would invalidate
    // range-for references
    const std::size_t n_existing = groups.size();
    for (std::size_t gi = 0; gi < n_existing; ++gi) {
        if (static_cast<int>(groups[gi].size()) < m_max) {
            groups[gi].push_back(next);
            enumerate_partitions(n, m_max, next + 1, groups, visit);
            groups[gi].pop_back();
        }
    }
    groups.push_back({next});
    enumerate_partitions(n, m_max, next + 1, groups, visit);
    groups.pop_back();
}

}  // namespace

Partition best_partition(const MutualInfoMatrix& mi, int m_max, PartitionSearch mode) {
    const int n = mi.n_sites();
    if (m_max < 1) {
        throw std::invalid_argument("best_partition: m_max must be >= 1");
    }
    if (m_max == 1) {
        return Partition::singletons(n);
    }
    if (mode == PartitionSearch::Exhaustive) {
        if (n > 8) {
            throw std::invalid_argument("best_partition: exhaustive search limited to N <= 8");
        }
        Partition best;
        double best_cost = -1.0;
        std::vector<std::vector<int>> groups;
        enumerate_partitions(n, m_max, 0, groups,
                             [&](const std::vector<std::vector<int>>& candidate) {
                                 Partition p;
                                 p.groups = candidate;
                                 p.m_max = m_max;
                                 const double c = partition_cost(p, mi);
                                 if (c > best_cost + 1e-15) {
                                     best_cost = c;
                                     best = p;
                                 }
                             });
        best.validate(n);
        return best;
    }
    // Greedy: all pairs by descending I, merge when the union fits.
    struct Pair {
        double info;
        int i, j;
    };
    std::vector<Pair> pairs;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            pairs.push_back({mi(i, j), i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.info != b.info) return a.info > b.info;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<int> group_of(n);
    std::vector<std::vector<int>> groups(n);
    for (int i = 0; i < n; ++i) {
        group_of[i] = i;
        groups[i] = {i};
    }
    for (const auto& p : pairs) {
        const int gi = group_of[p.i];
        const int gj = group_of[p.j];
        if (gi == gj) {
            continue;
        }
        if (static_cast<int>(groups[gi].size() + groups[gj].size()) > m_max) {
            continue;
        }
        for (int q : groups[gj]) {
            group_of[q] = gi;
        }
        groups[gi].insert(groups[gi].end(), groups[gj].begin(), groups[gj].end());
        groups[gj].clear();
    }
    Partition out;
    out.m_max = m_max;
    for (auto& g : groups) {
        if (!g.empty()) {
            out.groups.push_back(std::move(g));
        }
    }
    out.validate(n);
    return out;
}

DualFrame empirical_dual_frame(const ProductPovm& povm, const FrequencyModel& model) {
    std::vector<RVector> weights;
    for (const auto& table : model.tables()) {
        if (!(table.minCoeff() > 0.0)) {
            throw std::invalid_argument(
                "empirical_dual_frame: zero model probability (use s_bias > 0)");
        }
        weights.push_back(table.cwiseInverse());
    }
    DualFrame f = product_weighted_duals(povm, model.partition(), weights);
    return DualFrame::product(std::vector<DualGroup>(f.groups()), povm.n_sites(),
                              DualProvenance::Empirical);
}

}  // namespace icpovm
