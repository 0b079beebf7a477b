#include "icpovm/optimizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "icpovm/numeric.hpp"

namespace icpovm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

RVector numerical_gradient(const std::function<double(const RVector&)>& f, const RVector& x,
                           double rel_step) {
    const Eigen::Index n = x.size();
    RVector g(n);
    double fx = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x(i)));
        RVector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const double fp = f(xp);
        const double fm = f(xm);
        if (std::isfinite(fp) && std::isfinite(fm)) {
            g(i) = (fp - fm) / (2 * h);
        } else {
            if (std::isnan(fx)) {
                fx = f(x);
            }
            if (std::isfinite(fp)) {
                g(i) = (fp - fx) / h;
            } else if (std::isfinite(fm)) {
                g(i) = (fx - fm) / h;
            } else {
                g(i) = 0.0;
            }
        }
    }
    return g;
}

BfgsResult bfgs_minimize(const std::function<double(const RVector&)>& f, const RVector& x0,
                         const BfgsOptions& options) {
    const Eigen::Index n = x0.size();
    RVector x = x0;
    double fx = f(x);
    if (!std::isfinite(fx)) {
        return {x, fx, 0, false};
    }
    if (n == 0) {
        return {x, fx, 0, true};
    }
    RMatrix h = RMatrix::Identity(n, n);
    RVector g = numerical_gradient(f, x, options.fd_step_rel);
    int iter = 0;
    int stalls = 0;
    bool converged = false;
    constexpr double c1 = 1e-4;
    while (iter < options.max_iterations) {
        ++iter;
        if (g.norm() < options.gradient_tolerance) {
            converged = true;
            break;
        }
        RVector p = -(h * g);
        double gp = g.dot(p);
        if (!(gp < 0.0)) {
            h = RMatrix::Identity(n, n);
            p = -g;
            gp = g.dot(p);
            if (!(gp < 0.0)) {
                converged = true;  // zero gradient direction
                break;
            }
        }
        double t = 1.0;
        double fnew = kInf;
        RVector xnew;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xnew = x + t * p;
            fnew = f(xnew);
            if (std::isfinite(fnew) && fnew <= fx + c1 * t * gp) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            break;
        }
        if (fx - fnew < 1e-12 * (1.0 + std::abs(fx))) {
            ++stalls;
            if (stalls >= 2) {
                x = xnew;
                fx = fnew;
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
        const RVector gnew = numerical_gradient(f, xnew, options.fd_step_rel);
        const RVector s = xnew - x;
        const RVector y = gnew - g;
        const double ys = y.dot(s);
        if (ys > 1e-12 * y.norm() * s.norm()) {
            const double rho = 1.0 / ys;
            const RMatrix vt = RMatrix::Identity(n, n) - rho * (s * y.transpose());
            h = vt * h * vt.transpose() + rho * (s * s.transpose());
        } else {
            h = RMatrix::Identity(n, n);
        }
        x = xnew;
        fx = fnew;
        g = gnew;
    }
    return {std::move(x), fx, iter, converged};
}

// --- weight optimization ----------------------------------------------------------

namespace {

/// Shared multi-start raw-weights descent. `evaluate` maps exp(raw) weight
/// tables to the objective, returning +inf past the conditioning barrier.
struct WeightCore {
    std::vector<Eigen::Index> table_sizes;
    std::function<double(const std::vector<RVector>&)> evaluate;
};

std::vector<RVector> tables_from_raw(const WeightCore& core, const RVector& raw) {
    std::vector<RVector> tables;
    Eigen::Index at = 0;
    for (Eigen::Index sz : core.table_sizes) {
        tables.push_back(raw.segment(at, sz).array().exp().matrix());
        at += sz;
    }
    return tables;
}

std::pair<std::vector<RVector>, double> minimize_weights_multistart(const WeightCore& core,
                                                                    int restarts, SeededRng& rng,
                                                                    const BfgsOptions& options) {
    Eigen::Index dim = 0;
    for (Eigen::Index sz : core.table_sizes) {
        dim += sz;
    }
    const auto objective = [&core](const RVector& raw) {
        return core.evaluate(tables_from_raw(core, raw));
    };
    RVector best_raw = RVector::Zero(dim);
    double best_val = objective(best_raw);  // uniform weights = canonical duals
    BfgsResult r = bfgs_minimize(objective, best_raw, options);
    if (r.value < best_val) {
        best_val = r.value;
        best_raw = r.x;
    }
    for (int s = 1; s < restarts; ++s) {
        RVector raw(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            raw(i) = 0.5 * rng.gaussian();
        }
        const double f0 = objective(raw);
        if (!std::isfinite(f0)) {
            continue;
        }
        r = bfgs_minimize(objective, raw, options);
        if (r.value < best_val) {
            best_val = r.value;
            best_raw = r.x;
        }
    }
    return {tables_from_raw(core, best_raw), best_val};
}

}  // namespace

WeightOptResult minimize_ssv_over_weights(const Povm& povm, const HermitianOperator& observable,
                                          const DensityMatrix& rho, int restarts, SeededRng& rng,
                                          const BfgsOptions& options) {
    WeightCore core;
    core.table_sizes = {povm.n_outcomes()};
    core.evaluate = [&](const std::vector<RVector>& tables) {
        try {
            const WeightedSolve solve = weighted_duals_info(povm, WeightVector(tables[0]));
            if (solve.condition > tol::kBarrierCondition) {
                return kInf;
            }
            return exact_ssv(povm, solve.duals, observable, rho);
        } catch (const IcFailure&) {
            return kInf;
        }
    };
    auto [tables, val] = minimize_weights_multistart(core, restarts, rng, options);
    return {std::move(tables), val};
}

WeightOptResult minimize_ssv_over_weights(const ProductPovm& povm,
                                          const HermitianOperator& observable,
                                          const DensityMatrix& rho, const Partition& partition,
                                          int restarts, SeededRng& rng,
                                          const BfgsOptions& options) {
    Partition part = partition;
    part.validate(povm.n_sites());
    WeightCore core;
    for (const auto& sites : part.groups) {
        Eigen::Index sz = 1;
        for (int q : sites) {
            sz *= povm.factor(q).n_outcomes();
        }
        core.table_sizes.push_back(sz);
    }
    core.evaluate = [&povm, &observable, &rho, part](const std::vector<RVector>& tables) {
        try {
            const WeightedSolve solve = product_weighted_duals_info(povm, part, tables);
            if (solve.condition > tol::kBarrierCondition) {
                return kInf;
            }
            return exact_ssv(povm, solve.duals, observable, rho);
        } catch (const IcFailure&) {
            return kInf;
        }
    };
    auto [tables, val] = minimize_weights_multistart(core, restarts, rng, options);
    return {std::move(tables), val};
}

WeightOptResult minimize_ssv_over_weights(const Povm& povm, const HermitianOperator& observable,
                                          const OutcomeRecord& record, int restarts,
                                          SeededRng& rng, const BfgsOptions& options) {
    WeightCore core;
    core.table_sizes = {povm.n_outcomes()};
    core.evaluate = [&](const std::vector<RVector>& tables) {
        try {
            const WeightedSolve solve = weighted_duals_info(povm, WeightVector(tables[0]));
            if (solve.condition > tol::kBarrierCondition) {
                return kInf;
            }
            return sample_ssv(record, omega_coefficients(observable, solve.duals));
        } catch (const IcFailure&) {
            return kInf;
        }
    };
    auto [tables, val] = minimize_weights_multistart(core, restarts, rng, options);
    return {std::move(tables), val};
}

WeightOptResult minimize_ssv_over_weights(const ProductPovm& povm,
                                          const HermitianOperator& observable,
                                          const OutcomeRecord& record, const Partition& partition,
                                          int restarts, SeededRng& rng,
                                          const BfgsOptions& options) {
    Partition part = partition;
    part.validate(povm.n_sites());
    WeightCore core;
    for (const auto& sites : part.groups) {
        Eigen::Index sz = 1;
        for (int q : sites) {
            sz *= povm.factor(q).n_outcomes();
        }
        core.table_sizes.push_back(sz);
    }
    core.evaluate = [&povm, &observable, &record, part](const std::vector<RVector>& tables) {
        try {
            const WeightedSolve solve = product_weighted_duals_info(povm, part, tables);
            if (solve.condition > tol::kBarrierCondition) {
                return kInf;
            }
            return sample_ssv(record, omega_coefficients(observable, solve.duals));
        } catch (const IcFailure&) {
            return kInf;
        }
    };
    auto [tables, val] = minimize_weights_multistart(core, restarts, rng, options);
    return {std::move(tables), val};
}

// --- POVM class parametrization -----------------------------------------------------

namespace {

bool has_simplex_block(PovmClass c) {
    return c == PovmClass::Lbcs || c == PovmClass::Mub || c == PovmClass::GeneralPmSimulable;
}

/// (a, b) -> (q_x, q_y) on the open simplex with q_z as the softmax baseline.
std::pair<double, double> softmax_pair(double a, double b) {
    const double m = std::max({0.0, a, b});
    constexpr double floor = 1e-300;
    const double ex = std::max(std::exp(a - m), floor);
    const double ey = std::max(std::exp(b - m), floor);
    const double ez = std::max(std::exp(-m), floor);
    const double z = ex + ey + ez;
    return {ex / z, ey / z};
}

std::vector<double> raw_to_native(PovmClass c, const double* raw, int count) {
    std::vector<double> native(raw, raw + count);
    if (has_simplex_block(c) && count >= 2) {
        const auto [qx, qy] = softmax_pair(raw[0], raw[1]);
        native[0] = qx;
        native[1] = qy;
    }
    return native;
}

RVector default_init_raw(PovmClass c) {
    const int pc = povm_class_param_count(c);
    RVector raw = RVector::Zero(pc);
    if (c == PovmClass::Dilation4) {
        const auto sic = dilation4_sic_params();
        for (int i = 0; i < 8; ++i) {
            raw(i) = sic[i];
        }
    }
    return raw;
}

void fill_random_raw(PovmClass c, RVector& raw, Eigen::Index offset, SeededRng& rng) {
    const int pc = povm_class_param_count(c);
    const double two_pi = 2.0 * std::acos(-1.0);
    int angle_start = has_simplex_block(c) ? 2 : 0;
    for (int i = 0; i < angle_start; ++i) {
        raw(offset + i) = rng.gaussian();
    }
    for (int i = angle_start; i < pc; ++i) {
        raw(offset + i) = rng.uniform(0.0, two_pi);
    }
}

std::vector<PovmClassSpec> specs_from_raw(PovmClass c, int n_copies, const RVector& raw) {
    const int pc = povm_class_param_count(c);
    std::vector<PovmClassSpec> specs;
    for (int q = 0; q < n_copies; ++q) {
        PovmClassSpec spec;
        spec.class_id = c;
        spec.params = raw_to_native(c, raw.data() + q * pc, pc);
        specs.push_back(std::move(spec));
    }
    return specs;
}

}  // namespace

OptimizationResult minimize_povm_params(
    PovmClass povm_class, int n_copies,
    const std::function<double(const std::vector<PovmClassSpec>&)>& objective, int restarts,
    SeededRng& rng, const BfgsOptions& options) {
    const int pc = povm_class_param_count(povm_class);
    const Eigen::Index dim = static_cast<Eigen::Index>(pc) * n_copies;

    const auto raw_objective = [&](const RVector& raw) {
        try {
            return objective(specs_from_raw(povm_class, n_copies, raw));
        } catch (const IcFailure&) {
            return kInf;
        } catch (const std::invalid_argument&) {
            return kInf;  // line-search probe left the feasible region
        }
    };

    RVector init(dim);
    for (int q = 0; q < n_copies; ++q) {
        init.segment(q * pc, pc) = default_init_raw(povm_class);
    }

    OptimizationResult result;
    result.objective_value = kInf;

    const auto consider = [&](const BfgsResult& r) {
        if (r.value < result.objective_value) {
            result.objective_value = r.value;
            result.iterations = r.iterations;
            result.converged = r.converged;
            const auto specs = specs_from_raw(povm_class, n_copies, r.x);
            result.best_params.clear();
            for (const auto& s : specs) {
                result.best_params.insert(result.best_params.end(), s.params.begin(),
                                          s.params.end());
            }
        }
    };

    if (dim == 0) {
        const double f = raw_objective(init);
        if (!std::isfinite(f)) {
            throw std::invalid_argument("minimize_povm_params: objective not finite");
        }
        return {{}, {}, f, 0, true};
    }

    consider(bfgs_minimize(raw_objective, init, options));
    for (int s = 1; s < restarts; ++s) {
        RVector raw(dim);
        for (int q = 0; q < n_copies; ++q) {
            fill_random_raw(povm_class, raw, q * pc, rng);
        }
        if (!std::isfinite(raw_objective(raw))) {
            continue;
        }
        consider(bfgs_minimize(raw_objective, raw, options));
    }
    if (!std::isfinite(result.objective_value)) {
        throw std::invalid_argument("minimize_povm_params: objective not finite at any start");
    }
    return result;
}

// --- class performance ------------------------------------------------------------------

namespace {

int qubit_count_for_dim(Eigen::Index d) {
    int n = 0;
    while ((Eigen::Index(1) << n) < d) {
        ++n;
    }
    if ((Eigen::Index(1) << n) != d) {
        throw std::invalid_argument("state dimension is not a power of two");
    }
    return n;
}

double scheme_ssv(const ProductPovm& povm, const HermitianOperator& observable,
                  const DensityMatrix& rho, const DualScheme& scheme,
                  const BfgsOptions& options) {
    switch (scheme.kind) {
        case DualScheme::Kind::Canonical:
            return exact_ssv(povm, canonical_duals(povm), observable, rho);
        case DualScheme::Kind::AverageOptimal:
            return exact_ssv(povm, average_optimal_duals(povm), observable, rho);
        case DualScheme::Kind::Optimal:
            return exact_ssv(povm, optimal_duals(povm, rho), observable, rho);
        case DualScheme::Kind::FreeWeights: {
            if (!scheme.partition) {
                throw std::invalid_argument("FreeWeights scheme requires a partition");
            }
            SeededRng inner_rng(0, 0);  // single deterministic start in nested context
            return minimize_ssv_over_weights(povm, observable, rho, *scheme.partition, 1,
                                             inner_rng, options)
                .ssv;
        }
    }
    throw std::invalid_argument("unknown dual scheme");
}

}  // namespace

double fixed_povm_performance(const ProductPovm& povm, const HermitianOperator& observable,
                              const DensityMatrix& rho, const DualScheme& scheme, SeededRng&,
                              const BfgsOptions& options) {
    const double denom = eigenbasis_lower_bound(observable, rho);
    if (denom < 1e-12) {
        throw std::invalid_argument("performance denominator degenerate (eigenstate)");
    }
    return scheme_ssv(povm, observable, rho, scheme, options) / denom;
}

double class_performance(PovmClass povm_class, const HermitianOperator& observable,
                         const DensityMatrix& rho, const DualScheme& scheme, int restarts,
                         SeededRng& rng, const BfgsOptions& options) {
    const double denom = eigenbasis_lower_bound(observable, rho);
    if (denom < 1e-12) {
        throw std::invalid_argument("class_performance: denominator degenerate (eigenstate)");
    }
    const int nq = qubit_count_for_dim(rho.dim());
    const auto objective = [&](const std::vector<PovmClassSpec>& specs) {
        std::vector<Povm> factors;
        factors.reserve(specs.size());
        for (const auto& s : specs) {
            factors.push_back(build_povm(s));
        }
        const ProductPovm povm(std::move(factors));
        return scheme_ssv(povm, observable, rho, scheme, options) / denom;
    };
    return minimize_povm_params(povm_class, nq, objective, restarts, rng, options)
        .objective_value;
}

double cumulative_class_performance(PovmClass povm_class,
                                    const std::vector<HermitianOperator>& observables,
                                    const DensityMatrix& rho, const DualScheme& scheme,
                                    int restarts, SeededRng& rng, const BfgsOptions& options) {
    if (observables.empty()) {
        throw std::invalid_argument("cumulative_class_performance: no observables");
    }
    double denom = 0.0;
    for (const auto& o : observables) {
        denom += eigenbasis_lower_bound(o, rho);
    }
    if (denom < 1e-12) {
        throw std::invalid_argument("cumulative_class_performance: denominator degenerate");
    }
    const int nq = qubit_count_for_dim(rho.dim());
    const auto objective = [&](const std::vector<PovmClassSpec>& specs) {
        std::vector<Povm> factors;
        factors.reserve(specs.size());
        for (const auto& s : specs) {
            factors.push_back(build_povm(s));
        }
        const ProductPovm povm(std::move(factors));
        double total = 0.0;
        if (scheme.kind == DualScheme::Kind::FreeWeights && !scheme.per_observable) {
            // one shared weight table minimizing the cumulative SSV
            if (!scheme.partition) {
                throw std::invalid_argument("FreeWeights scheme requires a partition");
            }
            Partition part = *scheme.partition;
            part.validate(povm.n_sites());
            WeightCore core;
            for (const auto& sites : part.groups) {
                Eigen::Index sz = 1;
                for (int q : sites) {
                    sz *= povm.factor(q).n_outcomes();
                }
                core.table_sizes.push_back(sz);
            }
            core.evaluate = [&](const std::vector<RVector>& tables) {
                try {
                    const WeightedSolve solve = product_weighted_duals_info(povm, part, tables);
                    if (solve.condition > tol::kBarrierCondition) {
                        return kInf;
                    }
                    double acc = 0.0;
                    for (const auto& o : observables) {
                        acc += exact_ssv(povm, solve.duals, o, rho);
                    }
                    return acc;
                } catch (const IcFailure&) {
                    return kInf;
                }
            };
            SeededRng inner_rng(0, 0);
            total = minimize_weights_multistart(core, 1, inner_rng, options).second;
        } else {
            for (const auto& o : observables) {
                total += scheme_ssv(povm, o, rho, scheme, options);
            }
        }
        return total / denom;
    };
    return minimize_povm_params(povm_class, nq, objective, restarts, rng, options)
        .objective_value;
}

void OptimizationProblem::validate() const {
    if (objective == Objective::ExactSsv && !state) {
        throw std::invalid_argument("OptimizationProblem: exact SSV requires a state");
    }
    if (objective == Objective::SampleSsv && !record) {
        throw std::invalid_argument("OptimizationProblem: sample SSV requires a record");
    }
    if (observables.empty()) {
        throw std::invalid_argument("OptimizationProblem: no observables");
    }
}

}  // namespace icpovm
