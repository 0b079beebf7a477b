#include "icpovm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "icpovm/empirical.hpp"
#include "icpovm/numeric.hpp"

namespace icpovm::bench {

using nlohmann::json;

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("n_qubits")) c.n_qubits = j.at("n_qubits").get<int>();
        if (j.contains("n_repetitions")) c.n_repetitions = j.at("n_repetitions").get<int>();
        if (j.contains("n_observables")) c.n_observables = j.at("n_observables").get<int>();
        if (j.contains("shot_grid")) {
            c.shot_grid = j.at("shot_grid").get<std::vector<std::int64_t>>();
        }
        if (j.contains("s_bias")) {
            if (j.at("s_bias").is_array()) {
                c.s_bias.clear();
                for (const auto& b : j.at("s_bias")) {
                    c.s_bias.push_back(b.is_string() ? b.get<std::string>()
                                                     : format_double(b.get<double>()));
                }
            } else if (j.at("s_bias").is_string()) {
                c.s_bias = {j.at("s_bias").get<std::string>()};
            } else {
                c.s_bias = {format_double(j.at("s_bias").get<double>())};
            }
        }
        if (j.contains("povm_classes")) {
            c.povm_classes = j.at("povm_classes").get<std::vector<std::string>>();
        }
        if (j.contains("dual_schemes")) {
            c.dual_schemes = j.at("dual_schemes").get<std::vector<std::string>>();
        }
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
        if (j.contains("restarts")) c.restarts = j.at("restarts").get<int>();
        if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.n_repetitions < 1) {
        throw ConfigError("config: n_repetitions must be >= 1");
    }
    if (c.workers < 1) {
        throw ConfigError("config: workers must be >= 1");
    }
    return c;
}

std::string csv_header() {
    return "experiment,repetition,povm_class,dual_scheme,observable,metric,value,wall_time_ms,"
           "seed";
}

std::string to_csv_line(const ResultRow& row) {
    std::string line;
    line += row.experiment;
    line += ',' + std::to_string(row.repetition);
    line += ',' + row.povm_class;
    line += ',' + row.dual_scheme;
    line += ',' + std::to_string(row.observable);
    line += ',' + row.metric;
    line += ',' + format_double(row.value);
    line += ",0";  // wall_time_ms: fixed so identical seeds give identical bytes
    line += ',' + std::to_string(row.seed);
    return line;
}

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open output file: " + path);
    }
    out << csv_header() << "\n";
    for (const auto& row : rows) {
        out << to_csv_line(row) << "\n";
    }
}

namespace {

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

void write_summary(const std::string& path, const std::vector<ResultRow>& rows) {
    std::map<std::string, std::vector<double>> dists;
    for (const auto& row : rows) {
        dists[row.experiment + "/" + row.povm_class + "/" + row.dual_scheme + "/" + row.metric]
            .push_back(row.value);
    }
    json j;
    for (const auto& [key, values] : dists) {
        json entry;
        entry["count"] = values.size();
        entry["p05"] = quantile(values, 0.05);
        entry["p25"] = quantile(values, 0.25);
        entry["p50"] = quantile(values, 0.50);
        entry["p75"] = quantile(values, 0.75);
        entry["p95"] = quantile(values, 0.95);
        j[key] = std::move(entry);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open summary file: " + path);
    }
    out << j.dump(2) << "\n";
}

namespace {

/// Repetitions run on a small worker pool; per-repetition row blocks are
/// merged in repetition order so the output does not depend on worker count.
template <typename Fn>
std::vector<ResultRow> parallel_reps(int n_reps, int workers, Fn fn) {
    std::vector<std::vector<ResultRow>> blocks(n_reps);
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const int n_threads = std::min(workers, n_reps);
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const int rep = next.fetch_add(1);
                if (rep >= n_reps) {
                    return;
                }
                try {
                    blocks[rep] = fn(rep);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    std::vector<ResultRow> rows;
    for (auto& block : blocks) {
        rows.insert(rows.end(), block.begin(), block.end());
    }
    return rows;
}

ProductPovm shadows_product(int n) {
    std::vector<Povm> factors;
    for (int i = 0; i < n; ++i) {
        factors.push_back(classical_shadows_povm());
    }
    return ProductPovm(std::move(factors));
}

Partition contiguous_pairs(int n) {
    Partition p;
    p.m_max = 2;
    for (int i = 0; i < n; i += 2) {
        if (i + 1 < n) {
            p.groups.push_back({i, i + 1});
        } else {
            p.groups.push_back({i});
        }
    }
    return p;
}

struct SchemeSpec {
    std::string name;
    DualScheme scheme;
};

SchemeSpec parse_dual_scheme(const std::string& s, int n_qubits) {
    std::string base = s;
    bool shared = false;
    if (const auto pos = base.find(":shared"); pos != std::string::npos) {
        shared = true;
        base = base.substr(0, pos);
    }
    DualScheme scheme;
    if (base == "canonical") {
        scheme = DualScheme::canonical();
    } else if (base == "avg-optimal") {
        scheme = DualScheme::average_optimal();
    } else if (base == "optimal") {
        scheme = DualScheme::optimal();
    } else if (base == "weights-global") {
        scheme = DualScheme::free_weights(Partition::single_group(n_qubits), !shared);
    } else if (base == "weights-1local") {
        scheme = DualScheme::free_weights(Partition::singletons(n_qubits), !shared);
    } else if (base == "weights-2local") {
        scheme = DualScheme::free_weights(contiguous_pairs(n_qubits), !shared);
    } else {
        throw ConfigError("unknown dual scheme: " + s);
    }
    return {s, scheme};
}

double parse_bias(const std::string& spec, const ProductPovm& povm, const Partition& part) {
    if (spec == "auto") {
        return model_degrees_of_freedom(povm, part);
    }
    try {
        return std::stod(spec);
    } catch (const std::exception&) {
        throw ConfigError("bad s_bias value: " + spec);
    }
}

std::uint64_t row_stream(int rep, int a, int b) {
    return (static_cast<std::uint64_t>(rep) << 20) | (static_cast<std::uint64_t>(a) << 10) |
           static_cast<std::uint64_t>(b);
}

}  // namespace

std::vector<ResultRow> run_class_performance(const ExperimentConfig& config) {
    if (config.n_qubits < 1 || config.n_qubits > 2) {
        throw ConfigError("class-performance: n_qubits must be 1 or 2");
    }
    if (config.povm_classes.empty() || config.dual_schemes.empty()) {
        throw ConfigError("class-performance: povm_classes and dual_schemes required");
    }
    if (config.n_observables < 1) {
        throw ConfigError("class-performance: n_observables must be >= 1");
    }
    std::vector<PovmClass> classes;
    for (const auto& name : config.povm_classes) {
        try {
            classes.push_back(povm_class_from_name(name));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    std::vector<SchemeSpec> schemes;
    for (const auto& s : config.dual_schemes) {
        schemes.push_back(parse_dual_scheme(s, config.n_qubits));
    }
    const Eigen::Index dim = Eigen::Index(1) << config.n_qubits;
    const bool cumulative = config.n_observables > 1;

    return parallel_reps(config.n_repetitions, config.workers, [&](int rep) {
        std::vector<ResultRow> rows;
        SeededRng instance_rng(config.seed, row_stream(rep, 0, 0));
        const DensityMatrix rho = haar_random_state(dim, instance_rng);
        std::vector<HermitianOperator> observables;
        for (int i = 0; i < config.n_observables; ++i) {
            observables.push_back(random_observable(dim, instance_rng));
        }
        for (std::size_t ci = 0; ci < classes.size(); ++ci) {
            for (std::size_t si = 0; si < schemes.size(); ++si) {
                const std::uint64_t stream =
                    row_stream(rep, static_cast<int>(ci) + 1, static_cast<int>(si));
                SeededRng opt_rng(config.seed, stream);
                ResultRow row;
                row.experiment = config.experiment;
                row.repetition = rep;
                row.povm_class = povm_class_name(classes[ci]);
                row.dual_scheme = schemes[si].name;
                row.seed = stream;
                if (cumulative) {
                    row.observable = -1;
                    row.metric = "F_C";
                    row.value = cumulative_class_performance(classes[ci], observables, rho,
                                                             schemes[si].scheme, config.restarts,
                                                             opt_rng);
                } else {
                    row.observable = 0;
                    row.metric = "F";
                    row.value = class_performance(classes[ci], observables[0], rho,
                                                  schemes[si].scheme, config.restarts, opt_rng);
                }
                rows.push_back(std::move(row));
            }
        }
        return rows;
    });
}

std::vector<ResultRow> run_marginal_scaling(const ExperimentConfig& config) {
    if (config.n_qubits < 1 || config.n_qubits > 4) {
        throw ConfigError("marginal-scaling: n_qubits must be in 1..4");
    }
    for (const auto& name : config.povm_classes) {
        if (name != "classical-shadows") {
            throw ConfigError("marginal-scaling: the POVM is fixed to classical-shadows");
        }
    }
    std::vector<ResultRow> all;
    for (int n = 1; n <= config.n_qubits; ++n) {
        const ProductPovm povm = shadows_product(n);
        const Eigen::Index dim = Eigen::Index(1) << n;
        const std::string experiment = config.experiment + "[N=" + std::to_string(n) + "]";
        auto rows = parallel_reps(config.n_repetitions, config.workers, [&](int rep) {
            std::vector<ResultRow> out;
            const std::uint64_t stream = (static_cast<std::uint64_t>(n) << 32) |
                                         static_cast<std::uint64_t>(rep);
            SeededRng rng(config.seed, stream);
            const DensityMatrix rho = haar_random_state(dim, rng);
            const HermitianOperator obs = random_observable(dim, rng);
            const RVector probs = born_probabilities(povm, rho);
            const auto radices = povm.radices();

            const double canon = exact_ssv(povm, canonical_duals(povm), obs, rho);
            out.push_back({experiment, rep, "classical-shadows", "canonical", 0, "ssv", canon,
                           0.0, stream});

            const MutualInfoMatrix mi = mutual_info_matrix(probs, radices);
            const auto marginal_duals = [&](const Partition& part) {
                // infinite-shot limit: weights 1/marginal with the optimal-dual
                // probability floor
                const FrequencyModel model = marginalize(probs, radices, part);
                std::vector<RVector> weights;
                for (const auto& t : model.tables()) {
                    RVector w(t.size());
                    for (Eigen::Index i = 0; i < t.size(); ++i) {
                        w(i) = 1.0 / std::max(t(i), tol::kProbabilityFloor);
                    }
                    weights.push_back(std::move(w));
                }
                return product_weighted_duals(povm, model.partition(), weights);
            };

            const auto emit_ratio = [&](const std::string& scheme, double ssv) {
                out.push_back({experiment, rep, "classical-shadows", scheme, 0, "ratio",
                               ssv / canon, 0.0, stream});
            };
            emit_ratio("1local",
                       exact_ssv(povm, marginal_duals(Partition::singletons(n)), obs, rho));
            emit_ratio("2local",
                       exact_ssv(povm,
                                 marginal_duals(best_partition(mi, std::min(2, n),
                                                               PartitionSearch::Exhaustive)),
                                 obs, rho));
            emit_ratio("3local",
                       exact_ssv(povm,
                                 marginal_duals(best_partition(mi, std::min(3, n),
                                                               PartitionSearch::Exhaustive)),
                                 obs, rho));
            emit_ratio("global-optimal", exact_ssv(povm, optimal_duals(povm, rho), obs, rho));
            return out;
        });
        all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
}

std::vector<ResultRow> run_shot_convergence(const ExperimentConfig& config) {
    if (config.n_qubits < 1 || config.n_qubits > 6) {
        throw ConfigError("shot-convergence: n_qubits must be in 1..6");
    }
    if (config.shot_grid.empty()) {
        throw ConfigError("shot-convergence: shot_grid required");
    }
    if (!std::is_sorted(config.shot_grid.begin(), config.shot_grid.end())) {
        throw ConfigError("shot-convergence: shot_grid must be ascending");
    }
    for (const auto& name : config.povm_classes) {
        if (name != "classical-shadows") {
            throw ConfigError("shot-convergence: the POVM is fixed to classical-shadows");
        }
    }
    std::vector<std::string> model_schemes = config.dual_schemes;
    if (model_schemes.empty()) {
        model_schemes = {"1local", "2local", "3local", "global"};
    }
    const int n = config.n_qubits;
    const ProductPovm povm = shadows_product(n);
    const Eigen::Index dim = Eigen::Index(1) << n;

    // one fixed random instance per run; repetitions resample the shots
    SeededRng instance_rng(config.seed, std::uint64_t(1) << 40);
    const DensityMatrix rho = haar_random_state(dim, instance_rng);
    const HermitianOperator obs = random_observable(dim, instance_rng);

    std::vector<ResultRow> all;
    const double canon = exact_ssv(povm, canonical_duals(povm), obs, rho);
    const double avg = exact_ssv(povm, average_optimal_duals(povm), obs, rho);
    const double opt = exact_ssv(povm, optimal_duals(povm, rho), obs, rho);
    all.push_back({config.experiment, 0, "classical-shadows", "canonical", 0, "ssv", canon, 0.0,
                   0});
    all.push_back({config.experiment, 0, "classical-shadows", "avg-optimal", 0, "ssv", avg, 0.0,
                   0});
    all.push_back({config.experiment, 0, "classical-shadows", "optimal", 0, "ssv", opt, 0.0, 0});

    auto rows = parallel_reps(config.n_repetitions, config.workers, [&](int rep) {
        std::vector<ResultRow> out;
        for (std::size_t si = 0; si < config.shot_grid.size(); ++si) {
            const std::int64_t shots = config.shot_grid[si];
            const std::uint64_t stream = row_stream(rep, static_cast<int>(si), 1);
            SeededRng rng(config.seed, stream);
            OutcomeRecord record;
            record.n_sites = n;
            record.radices = povm.radices();
            if (shots > 0) {
                record = sample_outcomes(povm, rho, shots, rng);
            }
            const MutualInfoMatrix mi =
                shots > 0 ? mutual_info_matrix(record)
                          : MutualInfoMatrix(RMatrix::Zero(n, n));
            for (const auto& scheme : model_schemes) {
                Partition part;
                if (scheme == "1local") {
                    part = Partition::singletons(n);
                } else if (scheme == "2local") {
                    part = best_partition(mi, std::min(2, n), PartitionSearch::Exhaustive);
                } else if (scheme == "3local") {
                    part = best_partition(mi, std::min(3, n), PartitionSearch::Exhaustive);
                } else if (scheme == "global") {
                    part = Partition::single_group(n);
                } else {
                    throw ConfigError("shot-convergence: unknown model scheme " + scheme);
                }
                for (const auto& bias_spec : config.s_bias) {
                    const double bias = parse_bias(bias_spec, povm, part);
                    const FrequencyModel model = biased_model(record, povm, part, bias);
                    const DualFrame duals = empirical_dual_frame(povm, model);
                    const double ssv = exact_ssv(povm, duals, obs, rho);
                    ResultRow row;
                    row.experiment = config.experiment + "[S=" + std::to_string(shots) +
                                     ",bias=" + bias_spec + "]";
                    row.repetition = rep;
                    row.povm_class = "classical-shadows";
                    row.dual_scheme = scheme;
                    row.observable = 0;
                    row.metric = "ssv";
                    row.value = ssv;
                    row.seed = stream;
                    out.push_back(std::move(row));
                }
            }
        }
        return out;
    });
    all.insert(all.end(), rows.begin(), rows.end());
    return all;
}

json estimate_from_files(const std::string& shot_path, const std::string& povm_path,
                         const std::string& observable_path, const std::string& duals_spec) {
    const OutcomeRecord record = read_shot_file(shot_path);
    const PovmFile povm_file = load_povm_file(povm_path);
    const std::string hash = povm_description_hash(povm_file);
    if (record.povm_ref != hash) {
        throw ConfigError("shot file was generated with a different POVM (hash " +
                          record.povm_ref + " vs " + hash + ")");
    }
    const ProductPovm povm = build_product_povm(povm_file);
    if (povm.n_sites() != record.n_sites || povm.radices() != record.radices) {
        throw ConfigError("shot file outcome structure does not match the POVM");
    }
    const HermitianOperator obs = load_observable(observable_path);
    if (obs.dim() != povm.dim()) {
        throw ConfigError("observable dimension does not match the POVM");
    }
    const auto report = is_informationally_complete(povm);
    if (!report.informationally_complete) {
        throw IcFailure("estimate: POVM is not informationally complete (rank " +
                        std::to_string(report.rank) + ")");
    }

    DualFrame duals = canonical_duals(povm);
    if (duals_spec == "canonical") {
        // already built
    } else if (duals_spec == "avg-optimal") {
        duals = average_optimal_duals(povm);
    } else if (duals_spec.rfind("empirical:", 0) == 0) {
        std::string rest = duals_spec.substr(10);
        std::string bias_spec = "auto";
        if (const auto pos = rest.find(':'); pos != std::string::npos) {
            bias_spec = rest.substr(pos + 1);
            rest = rest.substr(0, pos);
        }
        int m = 0;
        try {
            m = std::stoi(rest);
        } catch (const std::exception&) {
            throw ConfigError("bad empirical duals spec: " + duals_spec);
        }
        if (m < 1 || m > povm.n_sites()) {
            throw ConfigError("empirical duals: m must be in 1..n_qubits");
        }
        Partition part;
        if (m == 1) {
            part = Partition::singletons(povm.n_sites());
        } else if (m >= povm.n_sites()) {
            part = Partition::single_group(povm.n_sites());
        } else {
            const MutualInfoMatrix mi = mutual_info_matrix(record);
            part = best_partition(mi, m,
                                  povm.n_sites() <= 8 ? PartitionSearch::Exhaustive
                                                      : PartitionSearch::Greedy);
        }
        const double bias = parse_bias(bias_spec, povm, part);
        duals = empirical_dual_frame(povm, biased_model(record, povm, part, bias));
    } else {
        throw ConfigError("unknown duals spec: " + duals_spec);
    }

    const OmegaTable omega = omega_coefficients(obs, duals);
    const double estimate = estimate_expectation(record, omega);
    const double ssv = sample_ssv(record, omega);
    json out;
    out["estimate"] = estimate;
    out["sample_ssv"] = ssv;
    out["std_error"] = std::sqrt(ssv / static_cast<double>(record.shots()));
    out["duals_provenance"] = provenance_name(duals.provenance());
    out["shots"] = record.shots();
    return out;
}

void run_and_write(const ExperimentConfig& config) {
    std::vector<ResultRow> rows;
    if (config.experiment == "class-performance") {
        rows = run_class_performance(config);
    } else if (config.experiment == "marginal-scaling") {
        rows = run_marginal_scaling(config);
    } else if (config.experiment == "shot-convergence") {
        rows = run_shot_convergence(config);
    } else {
        throw ConfigError("unknown experiment: " + config.experiment);
    }
    write_rows_csv(config.output_path, rows);
    write_summary(config.output_path + ".summary.json", rows);
}

}  // namespace icpovm::bench
