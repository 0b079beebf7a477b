#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icpovm/operators.hpp"

namespace icpovm {

/// Signals a POVM that is not informationally complete (or a frame
/// superoperator too ill-conditioned to invert).
struct IcFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A POVM: positive semi-definite effects summing to the identity.
/// Validated on construction (PSD to -1e-10, completeness to 1e-10).
class Povm {
  public:
    Povm(std::vector<Matrix> effects, std::vector<std::string> labels);
    explicit Povm(std::vector<Matrix> effects);

    Eigen::Index dim() const { return effects_.front().rows(); }
    int n_outcomes() const { return static_cast<int>(effects_.size()); }
    const Matrix& effect(int k) const { return effects_.at(k); }
    const std::vector<Matrix>& effects() const { return effects_; }
    const std::vector<std::string>& labels() const { return labels_; }

  private:
    std::vector<Matrix> effects_;
    std::vector<std::string> labels_;
};

/// Tensor-product POVM over N sites; global effects are indexed lazily by
/// per-site outcome tuples and materialized on demand.
class ProductPovm {
  public:
    explicit ProductPovm(std::vector<Povm> factors);

    int n_sites() const { return static_cast<int>(factors_.size()); }
    const Povm& factor(int site) const { return factors_.at(site); }
    const std::vector<Povm>& factors() const { return factors_; }

    Eigen::Index dim() const;
    /// Product of the per-site outcome counts.
    std::int64_t n_outcomes() const;
    /// Per-site outcome counts (mixed radix for flat indexing).
    std::vector<int> radices() const;

    /// Global effect for a per-site outcome tuple (Kronecker product).
    Matrix materialize_effect(const std::vector<int>& outcome) const;
    Matrix materialize_effect(std::int64_t flat) const;

    /// Full POVM with all n_outcomes() effects in flat-index order.
    Povm materialize() const;

    std::vector<int> unflatten(std::int64_t flat) const;
    std::int64_t flatten(const std::vector<int>& outcome) const;

  private:
    std::vector<Povm> factors_;
};

// --- single-qubit POVM classes ---------------------------------------------

/// (1/3) P_X (+) (1/3) P_Y (+) (1/3) P_Z; labels X+/X-/Y+/Y-/Z+/Z-.
Povm classical_shadows_povm();

/// Locally-biased classical shadows: q_b-weighted Pauli-basis projectors,
/// q_z = 1 - q_x - q_y; parameters must lie in the open simplex.
Povm lbcs_povm(double q_x, double q_y);

/// Single-qubit unitary U(theta, phi, lam) =
///   [[cos(theta/2),            -e^{i lam} sin(theta/2)],
///    [e^{i phi} sin(theta/2),   e^{i(phi+lam)} cos(theta/2)]].
Matrix unitary_zyz(double theta, double phi, double lam);

/// MUB POVM: one fixed unitary rotates all three LBCS bases, effects
/// U^dagger (q_b P_b) U.
Povm mub_povm(double q_x, double q_y, double theta, double phi, double lam);

/// General 6-outcome PM-simulable POVM: a separate unitary per basis;
/// angles = (theta_x, phi_x, lam_x, theta_y, ..., lam_z).
Povm general_pm_simulable_povm(double q_x, double q_y, const std::array<double, 9>& angles);

/// 4-outcome dilation POVM from a Naimark isometry V built as
///   V = [[U1 * diag(cos a, cos b)], [U2 * diag(sin a, sin b)]] * W^dagger
/// with U1 = Givens(p0, p1), U2 = Givens(p2, 0), (a, b) = (p3, p4) and
/// W = unitary_zyz(p5, p6, p7). Effects M_k = (row k of V)^dagger (row k of V).
/// Total and smooth in the 8 parameters; minimally IC for generic values.
Povm dilation4_povm(const std::array<double, 8>& params);

/// Reference parameter point of dilation4_povm: an exact SIC POVM
/// (all traces 1/2, pairwise Tr[M_j M_k] = 1/12).
std::array<double, 8> dilation4_sic_params();

ProductPovm product_povm(std::vector<Povm> factors);

// --- class specs ------------------------------------------------------------

enum class PovmClass { ClassicalShadows, Lbcs, Mub, GeneralPmSimulable, Dilation4 };

/// Native parameter count of each class (0 / 2 / 5 / 11 / 8).
int povm_class_param_count(PovmClass c);
std::string povm_class_name(PovmClass c);
PovmClass povm_class_from_name(const std::string& name);

/// A POVM class together with native parameters. Probability parameters must
/// lie in the open simplex.
struct PovmClassSpec {
    PovmClass class_id = PovmClass::ClassicalShadows;
    std::vector<double> params;
};

Povm build_povm(const PovmClassSpec& spec);

// --- measurement -------------------------------------------------------------

/// Born-rule outcome distribution p_k = Tr[rho M_k]. Entries in
/// [-1e-12, ...) are clipped to 0; the vector sums to 1 within 1e-10.
RVector born_probabilities(const Povm& povm, const DensityMatrix& rho);
RVector born_probabilities(const ProductPovm& povm, const DensityMatrix& rho);

/// Measurement shots: per-site outcome digits, S x n_sites (n_sites = 1 for a
/// plain Povm). povm_ref carries the description hash of the generating POVM.
struct OutcomeRecord {
    int n_sites = 1;
    std::vector<int> radices;
    std::vector<std::vector<int>> outcomes;
    std::string povm_ref;

    std::int64_t shots() const { return static_cast<std::int64_t>(outcomes.size()); }
    std::int64_t flatten(std::int64_t shot) const;
};

OutcomeRecord sample_outcomes(const Povm& povm, const DensityMatrix& rho, std::int64_t shots,
                              SeededRng& rng);
OutcomeRecord sample_outcomes(const ProductPovm& povm, const DensityMatrix& rho,
                              std::int64_t shots, SeededRng& rng);

struct IcReport {
    bool informationally_complete = false;
    int rank = 0;
};

/// Numerical rank of the matrix of vectorized effects; IC iff rank == d^2
/// (singular values above 1e-10 * sigma_max).
IcReport is_informationally_complete(const Povm& povm);
IcReport is_informationally_complete(const ProductPovm& povm);

}  // namespace icpovm
