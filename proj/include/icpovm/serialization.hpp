#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "icpovm/empirical.hpp"
#include "icpovm/estimation.hpp"
#include "icpovm/frames.hpp"
#include "icpovm/povm.hpp"

namespace icpovm {

/// File-system / parse failures (CLI exit code 4).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic shortest round-trip decimal representation.
std::string format_double(double v);

// --- POVM description files -----------------------------------------------------
//
// Either a single class object {"class": "...", "params": [...]} or a product
// {"product": [<class objects>]}.

struct PovmFile {
    std::vector<PovmClassSpec> factors;
};

nlohmann::json povm_file_to_json(const PovmFile& file);
PovmFile povm_file_from_json(const nlohmann::json& j);
PovmFile load_povm_file(const std::string& path);
ProductPovm build_product_povm(const PovmFile& file);

/// FNV-1a hash of the canonical JSON dump, prefixed "fnv1a64:".
std::string povm_description_hash(const PovmFile& file);

// --- observable files --------------------------------------------------------------
//
// {"dense": {"re": [[...]], "im": [[...]]}} or
// {"n_qubits": N, "paulis": [{"ops": "XZ..", "coeff": c}, ...]}.

HermitianOperator observable_from_json(const nlohmann::json& j);
HermitianOperator load_observable(const std::string& path);
nlohmann::json observable_to_json(const HermitianOperator& obs);

// --- shot-record files (JSON lines) ---------------------------------------------------
//
// Header line {"povm_hash": "...", "n_qubits": N, "outcomes_per_site": [...]},
// then one line per shot: [k_1, ..., k_N].

void write_shot_file(const std::string& path, const OutcomeRecord& record);
OutcomeRecord read_shot_file(const std::string& path);

// --- exports ------------------------------------------------------------------------

nlohmann::json dual_frame_to_json(const DualFrame& duals,
                                  const std::vector<RVector>* weights = nullptr);
nlohmann::json frequency_model_to_json(const FrequencyModel& model);

}  // namespace icpovm
