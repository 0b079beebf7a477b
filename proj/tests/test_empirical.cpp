#include <cmath>

#include "doctest.h"
#include "icpovm/empirical.hpp"
#include "icpovm/estimation.hpp"

using namespace icpovm;

namespace {

ProductPovm cs_product(int n) {
    std::vector<Povm> factors;
    for (int i = 0; i < n; ++i) {
        factors.push_back(classical_shadows_povm());
    }
    return ProductPovm(std::move(factors));
}

OutcomeRecord empty_record(const ProductPovm& povm) {
    OutcomeRecord rec;
    rec.n_sites = povm.n_sites();
    rec.radices = povm.radices();
    return rec;
}

}  // namespace

TEST_SUITE_BEGIN("empirical");

TEST_CASE("empirical frequencies count outcomes") {
    OutcomeRecord rec;
    rec.n_sites = 1;
    rec.radices = {6};
    rec.outcomes = {{0}, {0}, {1}};
    const auto freq = empirical_frequencies(rec);
    CHECK(freq.at(0) == doctest::Approx(2.0 / 3));
    CHECK(freq.at(1) == doctest::Approx(1.0 / 3));
    CHECK(freq.size() == 2);

    double total = 0;
    for (const auto& [k, f] : freq) {
        total += f;
    }
    CHECK(total == doctest::Approx(1.0));

    rec.outcomes = {{3}};
    CHECK(empirical_frequencies(rec).at(3) == doctest::Approx(1.0));

    rec.outcomes.clear();
    CHECK_THROWS_AS(empirical_frequencies(rec), std::invalid_argument);
}

TEST_CASE("biased frequencies: pure-bias limit and direct substitution") {
    const Povm cs = classical_shadows_povm();
    OutcomeRecord rec;
    rec.n_sites = 1;
    rec.radices = {6};

    // S = 0: f-tilde_k = Tr[M_k] / d = 1/6 for classical shadows
    const RVector pure = biased_frequencies(rec, cs, 100.0);
    for (int k = 0; k < 6; ++k) {
        CHECK(pure(k) == doctest::Approx(1.0 / 6).epsilon(1e-12));
    }

    // S = S_bias with counts c: f-tilde = (c_k + S/6) / (2S)
    rec.outcomes = {{0}, {0}, {1}, {2}};  // S = 4
    const RVector mix = biased_frequencies(rec, cs, 4.0);
    const double counts[6] = {2, 1, 1, 0, 0, 0};
    for (int k = 0; k < 6; ++k) {
        CHECK(mix(k) == doctest::Approx((counts[k] + 4.0 / 6) / 8.0).epsilon(1e-12));
    }
    CHECK(mix.sum() == doctest::Approx(1.0).epsilon(1e-10));

    // large-S limit approaches the raw frequencies
    SeededRng rng(5);
    const DensityMatrix rho = haar_random_state(2, rng);
    const OutcomeRecord big = sample_outcomes(cs, rho, 200000, rng);
    const RVector biased = biased_frequencies(big, cs, 10.0);
    const auto raw = empirical_frequencies(big);
    for (const auto& [k, f] : raw) {
        CHECK(std::abs(biased(k) - f) < 1e-3);
    }

    // zero bias with an unobserved outcome is rejected
    rec.outcomes = {{0}};
    CHECK_THROWS_AS(biased_frequencies(rec, cs, 0.0), std::invalid_argument);
}

TEST_CASE("marginalize: uniform, single group, correlation loss") {
    // uniform two-site distribution -> uniform single-site marginals
    const std::vector<int> radices = {6, 6};
    RVector uniform = RVector::Constant(36, 1.0 / 36);
    Partition singles = Partition::singletons(2);
    const FrequencyModel uni = marginalize(uniform, radices, singles);
    for (const auto& t : uni.tables()) {
        for (int k = 0; k < 6; ++k) {
            CHECK(t(k) == doctest::Approx(1.0 / 6).epsilon(1e-12));
        }
    }

    // single global group reproduces the input exactly
    SeededRng rng(7);
    RVector arbitrary(36);
    for (int k = 0; k < 36; ++k) {
        arbitrary(k) = rng.uniform(0, 1);
    }
    arbitrary /= arbitrary.sum();
    const FrequencyModel full = marginalize(arbitrary, radices, Partition::single_group(2));
    for (int k = 0; k < 36; ++k) {
        CHECK(full.tables()[0](k) == doctest::Approx(arbitrary(k)).epsilon(1e-12));
    }

    // perfectly correlated diagonal distribution: product of marginals differs
    RVector diag = RVector::Zero(36);
    for (int k = 0; k < 6; ++k) {
        diag(k * 6 + k) = 1.0 / 6;
    }
    const FrequencyModel lost = marginalize(diag, radices, singles);
    CHECK(lost.probability({0, 0}) == doctest::Approx(1.0 / 36).epsilon(1e-12));
    CHECK(lost.probability({0, 1}) == doctest::Approx(1.0 / 36).epsilon(1e-12));

    // marginal consistency: marginalizing the model's own product distribution
    // reproduces its tables
    RVector model_dist(36);
    for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
            model_dist(a * 6 + b) = lost.tables()[0](a) * lost.tables()[1](b);
        }
    }
    const FrequencyModel again = marginalize(model_dist, radices, singles);
    for (int g = 0; g < 2; ++g) {
        CHECK((again.tables()[g] - lost.tables()[g]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("mutual information: product, correlated, symmetric") {
    const std::vector<int> radices = {6, 6};
    // product distribution -> zero MI
    SeededRng rng(11);
    RVector fa(6), fb(6);
    for (int k = 0; k < 6; ++k) {
        fa(k) = rng.uniform(0.1, 1);
        fb(k) = rng.uniform(0.1, 1);
    }
    fa /= fa.sum();
    fb /= fb.sum();
    RVector prod(36);
    for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
            prod(a * 6 + b) = fa(a) * fb(b);
        }
    }
    CHECK(std::abs(mutual_information(prod, radices, 0, 1)) < 1e-12);

    // perfectly correlated uniform pair -> log 6
    RVector diag = RVector::Zero(36);
    for (int k = 0; k < 6; ++k) {
        diag(k * 6 + k) = 1.0 / 6;
    }
    CHECK(mutual_information(diag, radices, 0, 1) == doctest::Approx(std::log(6.0)).epsilon(1e-12));

    // symmetry and nonnegativity on random joints
    for (int trial = 0; trial < 100; ++trial) {
        RVector joint(36);
        for (int k = 0; k < 36; ++k) {
            joint(k) = rng.uniform(0, 1);
        }
        joint /= joint.sum();
        const double ij = mutual_information(joint, radices, 0, 1);
        const double ji = mutual_information(joint, radices, 1, 0);
        CHECK(ij == doctest::Approx(ji).epsilon(1e-12));
        CHECK(ij >= -1e-12);
    }

    CHECK_THROWS_AS(mutual_information(prod, radices, 1, 1), std::invalid_argument);
}

TEST_CASE("partition cost: ordered-pair double sum") {
    RMatrix mi = RMatrix::Zero(4, 4);
    mi(0, 1) = mi(1, 0) = 0.7;
    mi(2, 3) = mi(3, 2) = 0.2;
    const MutualInfoMatrix m(mi);

    CHECK(partition_cost(Partition::singletons(4), m) == doctest::Approx(0.0));

    Partition pair01;
    pair01.groups = {{0, 1}, {2}, {3}};
    pair01.m_max = 2;
    CHECK(partition_cost(pair01, m) == doctest::Approx(1.4));

    Partition both;
    both.groups = {{0, 1}, {2, 3}};
    both.m_max = 2;
    CHECK(partition_cost(both, m) == doctest::Approx(1.8));

    // merging groups never decreases the cost
    Partition merged = Partition::single_group(4);
    CHECK(partition_cost(merged, m) >= partition_cost(both, m));
}

TEST_CASE("best partition: exhaustive and greedy") {
    RMatrix mi = RMatrix::Zero(4, 4);
    mi(0, 1) = mi(1, 0) = 5.0;  // dominant pair
    mi(1, 2) = mi(2, 1) = 0.3;
    mi(2, 3) = mi(3, 2) = 0.4;
    const MutualInfoMatrix m(mi);

    const Partition ex2 = best_partition(m, 2, PartitionSearch::Exhaustive);
    REQUIRE(ex2.groups.size() == 2);
    CHECK(ex2.groups[0] == std::vector<int>{0, 1});
    CHECK(ex2.groups[1] == std::vector<int>{2, 3});

    const Partition g2 = best_partition(m, 2, PartitionSearch::Greedy);
    CHECK(partition_cost(g2, m) <= partition_cost(ex2, m) + 1e-12);
    CHECK(g2.groups[0] == std::vector<int>{0, 1});

    CHECK(best_partition(m, 1, PartitionSearch::Exhaustive).groups.size() == 4);

    // m_max = 3: shapes (3,1), (2,2) and finer are searched; exhaustive wins
    const Partition ex3 = best_partition(m, 3, PartitionSearch::Exhaustive);
    const Partition g3 = best_partition(m, 3, PartitionSearch::Greedy);
    CHECK(partition_cost(g3, m) <= partition_cost(ex3, m) + 1e-12);
    // here grouping {1,2,3} would score 1.4 < {0,1}+{2,3} = 10.8; check argmax
    CHECK(partition_cost(ex3, m) == doctest::Approx(10.8 + 0.0).epsilon(1e-12));

    // greedy cost <= exhaustive cost over random matrices
    SeededRng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        RMatrix r = RMatrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i) {
            for (int j = i + 1; j < 5; ++j) {
                r(i, j) = r(j, i) = rng.uniform(0, 1);
            }
        }
        const MutualInfoMatrix rm(r);
        const Partition ge = best_partition(rm, 2, PartitionSearch::Greedy);
        const Partition xe = best_partition(rm, 2, PartitionSearch::Exhaustive);
        CHECK(partition_cost(ge, rm) <= partition_cost(xe, rm) + 1e-12);
    }

    RMatrix big = RMatrix::Zero(9, 9);
    CHECK_THROWS_AS(best_partition(MutualInfoMatrix(big), 2, PartitionSearch::Exhaustive),
                    std::invalid_argument);
}

TEST_CASE("biased model from shots matches the global-bias construction") {
    SeededRng rng(17);
    const ProductPovm povm = cs_product(2);
    const DensityMatrix rho = haar_random_state(4, rng);
    const OutcomeRecord rec = sample_outcomes(povm, rho, 500, rng);

    // group-level bias equals marginalizing the globally-biased table when the
    // partition is compatible (product bias terms commute with marginals)
    const double s_bias = 36.0;
    const RVector global_biased = biased_frequencies(rec, povm, s_bias);
    const FrequencyModel model = biased_model(rec, povm, Partition::singletons(2), s_bias);
    const FrequencyModel from_global =
        marginalize(global_biased, povm.radices(), Partition::singletons(2));
    for (int g = 0; g < 2; ++g) {
        CHECK((model.tables()[g] - from_global.tables()[g]).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(model.s_bias() == s_bias);
    CHECK(model.shots_used() == 500);
}

TEST_CASE("empirical dual frame: S=0 bias recovers average-optimal duals") {
    SeededRng rng(19);
    const ProductPovm povm = cs_product(2);
    const OutcomeRecord rec = empty_record(povm);
    const FrequencyModel model = biased_model(rec, povm, Partition::singletons(2), 72.0);
    const DualFrame emp = empirical_dual_frame(povm, model);
    CHECK(emp.provenance() == DualProvenance::Empirical);

    const DualFrame avg = average_optimal_duals(povm);
    for (std::int64_t k = 0; k < povm.n_outcomes(); ++k) {
        const auto digits = povm.unflatten(k);
        CHECK((emp.dual(digits, povm.radices()) - avg.dual(digits, povm.radices()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
    }
}

TEST_CASE("empirical dual frame: exact probabilities + global group = optimal duals") {
    SeededRng rng(23);
    const ProductPovm povm = cs_product(2);
    const DensityMatrix rho = haar_random_state(4, rng);
    const RVector probs = born_probabilities(povm, rho);
    const FrequencyModel model = marginalize(probs, povm.radices(), Partition::single_group(2));
    const DualFrame emp = empirical_dual_frame(povm, model);
    const DualFrame opt = optimal_duals(povm, rho);
    for (std::int64_t k = 0; k < povm.n_outcomes(); ++k) {
        const auto digits = povm.unflatten(k);
        CHECK((emp.dual(digits, povm.radices()) - opt.dual(digits, povm.radices()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-8);
    }

    // duality holds for random biased models
    const OutcomeRecord rec = sample_outcomes(povm, rho, 300, rng);
    const FrequencyModel rnd = biased_model(rec, povm, Partition::singletons(2), 36.0);
    CHECK(duality_defect(povm, empirical_dual_frame(povm, rnd)) < 1e-9);

    // zero model probability is rejected
    RVector degenerate = RVector::Zero(36);
    degenerate(0) = 1.0;
    const FrequencyModel bad =
        marginalize(degenerate, povm.radices(), Partition::single_group(2));
    CHECK_THROWS_AS(empirical_dual_frame(povm, bad), std::invalid_argument);
}

TEST_CASE("statistical hierarchy: finer models never beat coarser ones (median)") {
    SeededRng rng(29);
    const int n_instances = 50;
    const ProductPovm povm = cs_product(4);
    std::vector<double> r1, r2, r3, rg;
    for (int inst = 0; inst < n_instances; ++inst) {
        SeededRng stream(1000, inst);
        const DensityMatrix rho = haar_random_state(16, stream);
        const HermitianOperator obs = random_observable(16, stream);
        const RVector probs = born_probabilities(povm, rho);
        const MutualInfoMatrix mi = mutual_info_matrix(probs, povm.radices());

        const auto ssv_for = [&](const Partition& part) {
            const FrequencyModel model = marginalize(probs, povm.radices(), part);
            // exact probabilities can carry zeros; clamp through a tiny bias-free
            // guard by skipping instances with zero marginals
            for (const auto& t : model.tables()) {
                if (!(t.minCoeff() > 0.0)) {
                    return -1.0;
                }
            }
            return exact_ssv(povm, empirical_dual_frame(povm, model), obs, rho);
        };
        const double s1 = ssv_for(Partition::singletons(4));
        const double s2 = ssv_for(best_partition(mi, 2, PartitionSearch::Exhaustive));
        const double s3 = ssv_for(best_partition(mi, 3, PartitionSearch::Exhaustive));
        const double sg = ssv_for(Partition::single_group(4));
        if (s1 < 0 || s2 < 0 || s3 < 0 || sg < 0) {
            continue;
        }
        r1.push_back(s1);
        r2.push_back(s2);
        r3.push_back(s3);
        rg.push_back(sg);
    }
    REQUIRE(r1.size() > 40);
    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double m1 = median(r1), m2 = median(r2), m3 = median(r3), mg = median(rg);
    CHECK(m2 <= m1 + 1e-9);
    CHECK(m3 <= m2 + 1e-9);
    CHECK(mg <= m3 + 1e-9);
}

TEST_CASE("shot convergence toward the optimal-dual SSV") {
    SeededRng rng(31);
    const ProductPovm povm = cs_product(2);
    const DensityMatrix rho = haar_random_state(4, rng);
    const HermitianOperator obs = random_observable(4, rng);
    const double opt_ssv = exact_ssv(povm, optimal_duals(povm, rho), obs, rho);

    const std::vector<std::int64_t> grid = {100, 1000, 10000, 100000};
    std::vector<double> medians;
    for (std::int64_t s : grid) {
        std::vector<double> vals;
        for (int rep = 0; rep < 9; ++rep) {
            SeededRng stream(77, 100 * rep + static_cast<int>(std::log10(double(s))));
            const OutcomeRecord rec = sample_outcomes(povm, rho, s, stream);
            const FrequencyModel model =
                biased_model(rec, povm, Partition::single_group(2), 36.0);
            vals.push_back(exact_ssv(povm, empirical_dual_frame(povm, model), obs, rho));
        }
        std::sort(vals.begin(), vals.end());
        medians.push_back(vals[vals.size() / 2]);
        // optimal duals are a hard floor
        CHECK(vals.front() >= opt_ssv - 1e-9);
    }
    // monotone trend of medians toward the optimum
    for (std::size_t i = 1; i < medians.size(); ++i) {
        CHECK(medians[i] <= medians[i - 1] + 1e-9);
    }
    CHECK(std::abs(medians.back() - opt_ssv) < 0.05 * opt_ssv + 1e-6);
}

TEST_SUITE_END();
