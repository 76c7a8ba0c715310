#pragma once

namespace repdyn {

// Centralized tolerances. Tests and library code refer to these by name so
// that every threshold in the project is auditable in one place.
namespace tol {
inline constexpr double structural = 1e-10;  // exact-by-construction identities
inline constexpr double spectral = 1e-8;     // dense eigen/SVD/Schur residuals
inline constexpr double iterative = 1e-6;    // quantities reached by iteration
}  // namespace tol

inline constexpr double default_gamma = 0.9;

// Loss threshold beyond which a training run is marked diverged.
inline constexpr double divergence_threshold = 1e12;

}  // namespace repdyn
