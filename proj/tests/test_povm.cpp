#include <cmath>

#include "doctest.h"
#include "icpovm/povm.hpp"

using namespace icpovm;

namespace {

DensityMatrix ket0_state() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    return DensityMatrix(m);
}

/// Born-rule oracle: direct trace evaluation, independent of the library path.
double born_oracle(const Matrix& rho, const Matrix& effect) {
    return (rho * effect).trace().real();
}

}  // namespace

TEST_SUITE_BEGIN("povm");

TEST_CASE("classical shadows POVM structure") {
    const Povm p = classical_shadows_povm();
    REQUIRE(p.n_outcomes() == 6);
    Matrix sum = Matrix::Zero(2, 2);
    for (const auto& m : p.effects()) {
        sum += m;
        CHECK(std::abs(m.trace().real() - 1.0 / 3.0) < 1e-14);
    }
    CHECK((sum - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

    const RVector probs = born_probabilities(p, ket0_state());
    const double expect[6] = {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 3, 0.0};
    for (int k = 0; k < 6; ++k) {
        CHECK(probs(k) == doctest::Approx(expect[k]).epsilon(1e-12));
        CHECK(probs(k) == doctest::Approx(born_oracle(ket0_state().matrix(), p.effect(k)))
                              .epsilon(1e-12));
    }
}

TEST_CASE("lbcs reduces to classical shadows at (1/3, 1/3)") {
    const Povm cs = classical_shadows_povm();
    const Povm lb = lbcs_povm(1.0 / 3, 1.0 / 3);
    for (int k = 0; k < 6; ++k) {
        CHECK((cs.effect(k) - lb.effect(k)).cwiseAbs().maxCoeff() < 1e-15);
    }

    const Povm biased = lbcs_povm(0.5, 0.25);
    const double traces[6] = {0.5, 0.5, 0.25, 0.25, 0.25, 0.25};
    Matrix sum = Matrix::Zero(2, 2);
    for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(biased.effect(k).trace().real() - traces[k]) < 1e-14);
        sum += biased.effect(k);
    }
    CHECK((sum - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

    CHECK_THROWS_AS(lbcs_povm(0.7, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(lbcs_povm(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("mub POVM: trivial angles and mutual unbiasedness") {
    const Povm cs = classical_shadows_povm();
    const Povm m0 = mub_povm(1.0 / 3, 1.0 / 3, 0, 0, 0);
    for (int k = 0; k < 6; ++k) {
        CHECK((cs.effect(k) - m0.effect(k)).cwiseAbs().maxCoeff() < 1e-14);
    }

    SeededRng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const double qx = rng.uniform(0.1, 0.5);
        const double qy = rng.uniform(0.1, 0.4);
        const Povm m = mub_povm(qx, qy, rng.uniform(0, 3.14), rng.uniform(0, 6.28),
                                rng.uniform(0, 6.28));
        Matrix sum = Matrix::Zero(2, 2);
        for (const auto& e : m.effects()) {
            sum += e;
        }
        CHECK((sum - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

        // pairwise overlap |<a|b>|^2 = 1/2 between the three rotated bases:
        // normalized rank-1 effects e/q have Tr[(e_a/q_a)(e_b/q_b)] = 1/2.
        const double q[6] = {qx, qx, qy, qy, 1 - qx - qy, 1 - qx - qy};
        for (int a = 0; a < 2; ++a) {
            for (int b = 2; b < 6; ++b) {
                const double ov =
                    (m.effect(a) * m.effect(b)).trace().real() / (q[a] * q[b]);
                CHECK(ov == doctest::Approx(0.5).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("general PM-simulable POVM reductions") {
    const Povm cs = classical_shadows_povm();
    const Povm g0 = general_pm_simulable_povm(1.0 / 3, 1.0 / 3, {0, 0, 0, 0, 0, 0, 0, 0, 0});
    for (int k = 0; k < 6; ++k) {
        CHECK((cs.effect(k) - g0.effect(k)).cwiseAbs().maxCoeff() < 1e-14);
    }

    // equal unitaries per basis reproduce the MUB POVM
    const std::array<double, 9> angles = {0.7, 1.1, 2.2, 0.7, 1.1, 2.2, 0.7, 1.1, 2.2};
    const Povm g = general_pm_simulable_povm(0.4, 0.3, angles);
    const Povm m = mub_povm(0.4, 0.3, 0.7, 1.1, 2.2);
    for (int k = 0; k < 6; ++k) {
        CHECK((g.effect(k) - m.effect(k)).cwiseAbs().maxCoeff() < 1e-13);
    }

    SeededRng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 9> a;
        for (auto& x : a) {
            x = rng.uniform(0, 6.28);
        }
        const Povm p = general_pm_simulable_povm(rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4), a);
        Matrix sum = Matrix::Zero(2, 2);
        for (const auto& e : p.effects()) {
            sum += e;
        }
        CHECK((sum - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dilation POVM: validity, generic IC, SIC reference point") {
    SeededRng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<double, 8> p;
        for (auto& x : p) {
            x = rng.uniform(0, 6.28);
        }
        const Povm povm = dilation4_povm(p);  // constructor checks PSD + completeness
        CHECK(povm.n_outcomes() == 4);
    }

    // generic parameters give a minimally IC POVM (frame rank 4)
    int ic_count = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 8> p;
        for (auto& x : p) {
            x = rng.uniform(0, 6.28);
        }
        if (is_informationally_complete(dilation4_povm(p)).rank == 4) {
            ++ic_count;
        }
    }
    CHECK(ic_count == 200);

    // documented reference point: exact SIC (traces 1/2, overlaps 1/12)
    const Povm sic = dilation4_povm(dilation4_sic_params());
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(sic.effect(k).trace().real() - 0.5) < 1e-10);
    }
    for (int j = 0; j < 4; ++j) {
        for (int k = j + 1; k < 4; ++k) {
            CHECK((sic.effect(j) * sic.effect(k)).trace().real() ==
                  doctest::Approx(1.0 / 12).epsilon(1e-10));
        }
    }
}

TEST_CASE("PM-simulable effects are probability-weighted rank-1 projectors") {
    SeededRng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const Povm p = mub_povm(rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.4),
                                rng.uniform(0, 3.14), rng.uniform(0, 6.28), rng.uniform(0, 6.28));
        for (const auto& e : p.effects()) {
            const double tr = e.trace().real();
            Eigen::SelfAdjointEigenSolver<Matrix> es(e, Eigen::EigenvaluesOnly);
            // one eigenvalue = trace (weight), the other 0
            CHECK(std::abs(es.eigenvalues().maxCoeff() - tr) < 1e-10);
            CHECK(std::abs(es.eigenvalues().minCoeff()) < 1e-10);
        }
    }
}

TEST_CASE("product POVM indexing and materialization") {
    const ProductPovm pp = product_povm({classical_shadows_povm(), classical_shadows_povm()});
    CHECK(pp.n_outcomes() == 36);
    CHECK(pp.dim() == 4);

    // (Z+, Z+) = (4, 4): effect (1/9)|00><00|
    const Matrix e = pp.materialize_effect({4, 4});
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = 1.0 / 9.0;
    CHECK((e - expect).cwiseAbs().maxCoeff() < 1e-14);

    Matrix sum = Matrix::Zero(4, 4);
    for (std::int64_t k = 0; k < 36; ++k) {
        sum += pp.materialize_effect(k);
        CHECK(pp.flatten(pp.unflatten(k)) == k);
    }
    CHECK((sum - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(product_povm({}), std::invalid_argument);
}

TEST_CASE("product born probabilities match the materialized oracle") {
    SeededRng rng(37);
    const ProductPovm pp =
        product_povm({classical_shadows_povm(), lbcs_povm(0.5, 0.25),
                      mub_povm(0.3, 0.3, 0.5, 1.0, 2.0)});
    const DensityMatrix rho = haar_random_state(8, rng);
    const RVector fast = born_probabilities(pp, rho);
    const Povm flat = pp.materialize();
    const RVector slow = born_probabilities(flat, rho);
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fast.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fast.minCoeff() >= 0.0);

    // maximally mixed state: all classical-shadows probabilities 1/6
    Matrix mixed = Matrix::Identity(2, 2) / 2.0;
    const RVector pmix = born_probabilities(classical_shadows_povm(), DensityMatrix(mixed));
    for (int k = 0; k < 6; ++k) {
        CHECK(pmix(k) == doctest::Approx(1.0 / 6).epsilon(1e-12));
    }
}

TEST_CASE("sampling: determinism, zero-probability outcomes, concentration") {
    SeededRng rng(41);
    const Povm cs = classical_shadows_povm();
    const DensityMatrix rho = ket0_state();

    SeededRng a(1, 5), b(1, 5);
    const OutcomeRecord ra = sample_outcomes(cs, rho, 1000, a);
    const OutcomeRecord rb = sample_outcomes(cs, rho, 1000, b);
    CHECK(ra.outcomes == rb.outcomes);

    const std::int64_t s = 1000000;
    const OutcomeRecord rec = sample_outcomes(cs, rho, s, rng);
    std::vector<std::int64_t> counts(6, 0);
    for (const auto& o : rec.outcomes) {
        ++counts[o[0]];
    }
    CHECK(counts[5] == 0);  // "Z-" has probability zero
    const double f4 = double(counts[4]) / double(s);
    CHECK(std::abs(f4 - 1.0 / 3) < 3.0 * std::sqrt((1.0 / 3) * (2.0 / 3) / double(s)));

    CHECK_THROWS_AS(sample_outcomes(cs, rho, 0, rng), std::invalid_argument);
}

TEST_CASE("sampled distribution is close in total variation per class") {
    SeededRng rng(43);
    const std::int64_t s = 100000;
    std::vector<Povm> povms = {classical_shadows_povm(), lbcs_povm(0.5, 0.2),
                               mub_povm(0.25, 0.35, 1.2, 0.4, 2.2),
                               general_pm_simulable_povm(
                                   0.3, 0.35, {0.1, 0.9, 1.7, 2.5, 3.3, 4.1, 4.9, 5.7, 0.2}),
                               dilation4_povm({0.3, 1.4, 2.5, 3.6, 4.7, 5.8, 0.9, 2.0})};
    for (const auto& p : povms) {
        const DensityMatrix rho = haar_random_state(2, rng);
        const RVector probs = born_probabilities(p, rho);
        const OutcomeRecord rec = sample_outcomes(p, rho, s, rng);
        RVector freq = RVector::Zero(p.n_outcomes());
        for (const auto& o : rec.outcomes) {
            freq(o[0]) += 1.0 / double(s);
        }
        const double tv = 0.5 * (freq - probs).cwiseAbs().sum();
        CHECK(tv < 5.0 * std::sqrt(double(p.n_outcomes()) / double(s)));
    }
}

TEST_CASE("informational completeness ranks") {
    const auto cs_report = is_informationally_complete(classical_shadows_povm());
    CHECK(cs_report.informationally_complete);
    CHECK(cs_report.rank == 4);

    // P_Z alone: two projectors, rank 2
    Matrix zp = Matrix::Zero(2, 2), zm = Matrix::Zero(2, 2);
    zp(0, 0) = 1;
    zm(1, 1) = 1;
    const Povm pz({zp, zm});
    const auto pz_report = is_informationally_complete(pz);
    CHECK_FALSE(pz_report.informationally_complete);
    CHECK(pz_report.rank == 2);

    const ProductPovm pp = product_povm({classical_shadows_povm(), classical_shadows_povm()});
    const auto pp_report = is_informationally_complete(pp);
    CHECK(pp_report.informationally_complete);
    CHECK(pp_report.rank == 16);
}

TEST_CASE("povm class specs build and validate") {
    CHECK(build_povm({PovmClass::ClassicalShadows, {}}).n_outcomes() == 6);
    CHECK(build_povm({PovmClass::Lbcs, {0.4, 0.3}}).n_outcomes() == 6);
    CHECK(build_povm({PovmClass::Mub, {0.4, 0.3, 1, 2, 3}}).n_outcomes() == 6);
    CHECK(build_povm({PovmClass::Dilation4, {1, 2, 3, 4, 5, 6, 7, 0.5}}).n_outcomes() == 4);
    CHECK_THROWS_AS(build_povm({PovmClass::Lbcs, {0.4}}), std::invalid_argument);
    CHECK(povm_class_from_name("general-pm") == PovmClass::GeneralPmSimulable);
    CHECK(povm_class_name(PovmClass::Mub) == "mub");
}

TEST_SUITE_END();
