#pragma once

#include <random>

#include "homsteer/representation.hpp"

namespace homsteer {

inline constexpr double kNullspaceCutoff = 1e-9;

/// Orthonormal basis (as columns) of the nullspace of `a`. Singular values at
/// or below `rel_cutoff * max(sigma_max, 1)` count as zero, so a matrix that
/// is zero up to rounding has rank 0. Columns are sign-fixed so
/// the first coordinate with magnitude above 1e-12 is positive.
Matrix nullspace(const Matrix& a, double rel_cutoff = kNullspaceCutoff);

/// Rank with the same singular-value threshold as nullspace().
int numerical_rank(const Matrix& a, double rel_cutoff = kNullspaceCutoff);

/// Flip column signs so each column's first significant entry is positive.
void sign_fix_columns(Matrix& basis);

/// Entries drawn uniformly from [-1, 1].
Matrix random_uniform(int rows, int cols, std::mt19937_64& rng);

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace homsteer
