#pragma once

// Central tolerance table. Algebraic identities are held to 1e-12,
// spectral checks to 1e-10, linear-system residuals to 1e-9.
namespace icpovm::tol {

inline constexpr double kHermitian = 1e-12;
inline constexpr double kAlgebraic = 1e-12;
inline constexpr double kSpectral = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPsdFloor = -1e-10;
inline constexpr double kLinearSolve = 1e-9;
inline constexpr double kDuality = 1e-9;
inline constexpr double kIcRankRel = 1e-10;
inline constexpr double kConditionLimit = 1e12;
inline constexpr double kBarrierCondition = 1e10;
inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kProbabilityClip = -1e-12;

}  // namespace icpovm::tol
