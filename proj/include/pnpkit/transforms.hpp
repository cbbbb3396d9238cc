#pragma once

#include "pnpkit/core.hpp"

namespace pnpkit {

enum class TransformKind { Haar, Dct };

const char* to_string(TransformKind kind);
TransformKind parse_transform(const std::string& name);

/// Orthonormal multi-level Haar transform (Mallat layout: coarse coefficients
/// first along every axis). Rank 2 is separable, rank 3 is channel-wise.
/// Every grid dimension must be divisible by 2^levels.
Signal haar_forward(const Signal& x, int levels);
Signal haar_inverse(const Signal& coeffs, int levels);

/// Largest level count the grid of `shape` supports.
int max_haar_levels(const Shape& shape);

/// Orthonormal DCT-II matrix of size n (rows are basis vectors).
Eigen::MatrixXd dct_matrix(int n);
Signal dct_forward(const Signal& x);
Signal dct_inverse(const Signal& coeffs);

Signal transform_forward(TransformKind kind, const Signal& x, int levels);
Signal transform_inverse(TransformKind kind, const Signal& coeffs, int levels);

/// Per-coefficient frequency index in [0, 1]: 0 for the coarsest coefficient
/// and 1 for the finest. Same layout as the forward transform output.
Vec normalized_frequency(TransformKind kind, const Shape& shape, int levels);

}  // namespace pnpkit
