#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "torsionlab/complex.hpp"

namespace tl {

using Rng = std::mt19937_64;

/// Gaussian complex entries, unit variance per real component.
Mat gaussian_matrix(Rng& rng, Index rows, Index cols);
/// Singular values drawn uniformly from [lo, hi], Haar-ish singular vectors.
Mat well_conditioned_matrix(Rng& rng, Index k, double lo = 0.5, double hi = 2.0);

/// Scalar complex with the given module dimensions; d_q = d̃_q (I − P_range(d_{q−1})).
HilbertComplex random_complex(Rng& rng, const std::vector<Index>& dims);
/// Acyclic scalar complex with rank r_q for d_q; C_q = ℂ^{r_{q−1}} ⊕ ℂ^{r_q} conjugated by random g_q.
HilbertComplex random_acyclic_complex(Rng& rng, const std::vector<Index>& ranks);
/// Random module dimensions: length in [1, max_len] differentials, entries in [0, max_dim].
std::vector<Index> random_dims(Rng& rng, int max_len, Index max_dim);

}  // namespace tl
