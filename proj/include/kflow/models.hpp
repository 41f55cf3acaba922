#pragma once

#include "kflow/spectral_triple.hpp"
#include "kflow/vn_model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace kflow::models {

using Rng = std::mt19937_64;

Mat random_matrix(int n, int m, Rng& rng);
Mat random_hermitian(int n, Rng& rng);
Mat random_unitary(int n, Rng& rng);
/// Random orthogonal projection of rank r in dimension n.
Mat random_projection(int n, int r, Rng& rng);

VnAlgebra weighted_model(const std::vector<int>& dims, const std::vector<double>& weights,
                         const std::vector<bool>& ideal_mask);

struct DiracModel {
    int m = 0;
    int k = 0;
    VnTriple triple;
    BlockOperator u;  // k-step cyclic shift e_j ↦ e_{j+k}
};

/// Truncated circle Dirac operator D = diag(-m, ..., m) on a single ideal
/// block of dimension 2m + 1 with generators {1, u, u*}.
DiracModel dirac_circle(int m, int k);

struct ToeplitzKernels {
    long kernel = 0;           // dim N(pup + 1 - p)
    long cokernel = 0;         // dim N(pu*p + 1 - p)
    long interior_kernel = 0;  // those localized in |j| < m - |k|
    long interior_cokernel = 0;
    /// interior_kernel - interior_cokernel.
    long windowed_index() const { return interior_kernel - interior_cokernel; }
};

/// Brute-force SVD kernels of the compressed shift on the Dirac window,
/// split into vectors localized at the wrap-around edge and in the interior.
ToeplitzKernels toeplitz_kernels(int m, int k);

/// Eigenvalue-crossing sign convention: an eigenvalue moving from negative
/// to nonnegative contributes this to the count. Fixed by the dim-2
/// calibration path diag(1, -1) -> diag(1, 1).
inline constexpr long kUpwardCrossingSign = -1;

/// All-ideal single block of dimension n; B_t = V(t) diag(levels, curves) V(t)*
/// with one linear zero-crossing curve per entry of `crossings` (+1 upward,
/// -1 downward) and V(t) = exp(itH) for a seeded random Hermitian H.
OperatorPath random_crossing_path(int n, const std::vector<int>& crossings, std::uint64_t seed, int segments = 128);

/// Signed zero-crossing count per block, from tracked sorted eigenvalue curves.
std::vector<long> crossing_oracle_blocks(const OperatorPath& path, int samples);
long crossing_oracle(const OperatorPath& path, int samples);

}  // namespace kflow::models
