#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "icpovm/estimation.hpp"
#include "icpovm/frames.hpp"
#include "icpovm/partition.hpp"
#include "icpovm/povm.hpp"

namespace icpovm {

// --- quasi-Newton core --------------------------------------------------------

struct BfgsOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    double fd_step_rel = 1e-6;
};

struct BfgsResult {
    RVector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Central finite differences with relative step h_i = rel_step * max(1, |x_i|).
RVector numerical_gradient(const std::function<double(const RVector&)>& f, const RVector& x,
                           double rel_step);

/// Dense BFGS with Armijo backtracking and numerical gradients. Objective
/// values of +infinity act as barriers (line search backs away from them).
BfgsResult bfgs_minimize(const std::function<double(const RVector&)>& f, const RVector& x0,
                         const BfgsOptions& options = {});

// --- dual schemes ---------------------------------------------------------------

struct DualScheme {
    enum class Kind { Canonical, AverageOptimal, Optimal, FreeWeights };
    Kind kind = Kind::Canonical;
    /// FreeWeights only: the partition the weight tables factorize over.
    std::optional<Partition> partition;
    /// Cumulative performance only: re-optimize the weights per observable.
    bool per_observable = true;

    static DualScheme canonical() { return {Kind::Canonical, std::nullopt, true}; }
    static DualScheme average_optimal() { return {Kind::AverageOptimal, std::nullopt, true}; }
    static DualScheme optimal() { return {Kind::Optimal, std::nullopt, true}; }
    static DualScheme free_weights(Partition p, bool per_obs = true) {
        return {Kind::FreeWeights, std::move(p), per_obs};
    }
};

// --- weight optimization ----------------------------------------------------------

struct WeightOptResult {
    std::vector<RVector> group_weights;
    double ssv = 0.0;
};

/// Minimizes the exact SSV over strictly positive weights exp(raw), starting
/// from uniform weights plus (restarts - 1) random initializations. The
/// returned SSV never exceeds the canonical-dual SSV.
WeightOptResult minimize_ssv_over_weights(const Povm& povm, const HermitianOperator& observable,
                                          const DensityMatrix& rho, int restarts, SeededRng& rng,
                                          const BfgsOptions& options = {});
WeightOptResult minimize_ssv_over_weights(const ProductPovm& povm,
                                          const HermitianOperator& observable,
                                          const DensityMatrix& rho, const Partition& partition,
                                          int restarts, SeededRng& rng,
                                          const BfgsOptions& options = {});

/// Sample-variance objective over a fixed shot record.
WeightOptResult minimize_ssv_over_weights(const Povm& povm, const HermitianOperator& observable,
                                          const OutcomeRecord& record, int restarts,
                                          SeededRng& rng, const BfgsOptions& options = {});
WeightOptResult minimize_ssv_over_weights(const ProductPovm& povm,
                                          const HermitianOperator& observable,
                                          const OutcomeRecord& record, const Partition& partition,
                                          int restarts, SeededRng& rng,
                                          const BfgsOptions& options = {});

// --- POVM class optimization --------------------------------------------------------

struct OptimizationResult {
    /// Native class parameters, concatenated over qubits.
    std::vector<double> best_params;
    /// Optimized weight tables per observable (FreeWeights schemes only).
    std::vector<std::vector<RVector>> best_weights;
    double objective_value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Multi-start BFGS over the unconstrained reparametrization of a POVM class
/// (two softmax logits for the basis probabilities, angles unconstrained).
/// The objective receives one PovmClassSpec per qubit copy.
OptimizationResult minimize_povm_params(
    PovmClass povm_class, int n_copies,
    const std::function<double(const std::vector<PovmClassSpec>&)>& objective, int restarts,
    SeededRng& rng, const BfgsOptions& options = {});

/// Class performance F (Eq. 19): minimized SSV over the POVM class (and dual
/// weights, for FreeWeights schemes) normalized by the eigenbasis bound.
double class_performance(PovmClass povm_class, const HermitianOperator& observable,
                         const DensityMatrix& rho, const DualScheme& scheme, int restarts,
                         SeededRng& rng, const BfgsOptions& options = {});

/// Cumulative class performance F_C (Eq. 20): one shared POVM parameter
/// vector; dual weights handled per observable or shared per the scheme.
double cumulative_class_performance(PovmClass povm_class,
                                    const std::vector<HermitianOperator>& observables,
                                    const DensityMatrix& rho, const DualScheme& scheme,
                                    int restarts, SeededRng& rng,
                                    const BfgsOptions& options = {});

/// Class performance of a fixed POVM (no parameter search); used for the
/// classical-shadows class and for injected reference measurements.
double fixed_povm_performance(const ProductPovm& povm, const HermitianOperator& observable,
                              const DensityMatrix& rho, const DualScheme& scheme, SeededRng& rng,
                              const BfgsOptions& options = {});

/// Aggregate problem description (spec surface for the CLI).
struct OptimizationProblem {
    PovmClass povm_class = PovmClass::ClassicalShadows;
    int n_qubits = 1;
    DualScheme dual_scheme;
    std::vector<HermitianOperator> observables;
    std::optional<DensityMatrix> state;
    std::optional<OutcomeRecord> record;
    enum class Objective { ExactSsv, SampleSsv } objective = Objective::ExactSsv;

    void validate() const;
};

}  // namespace icpovm
