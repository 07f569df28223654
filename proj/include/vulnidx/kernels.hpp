#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant; the two produce bit-identical output because each output
// element is reduced in the same (row) order regardless of thread count.

#include <cstddef>
#include <span>

#include "vulnidx/matrix.hpp"

namespace vulnidx::kernels {

namespace serial {

/// XᵀX for an n x p matrix X (p x p, symmetric).
Matrix cross_product(const Matrix& x);

/// A·B.
Matrix multiply(const Matrix& a, const Matrix& b);

/// Nearest centroid per point (squared Euclidean, ties -> lowest index).
/// Writes labels and squared distances; returns how many labels changed.
std::size_t assign_nearest(const Matrix& points, const Matrix& centroids,
                           std::span<std::size_t> labels, std::span<double> dist2);

/// Per-cluster coordinate means. Clusters with no members keep a zero row and
/// count 0.
void centroid_means(const Matrix& points, std::span<const std::size_t> labels,
                    Matrix& centroids, std::span<std::size_t> counts);

}  // namespace serial

namespace omp {

Matrix cross_product(const Matrix& x);
Matrix multiply(const Matrix& a, const Matrix& b);
std::size_t assign_nearest(const Matrix& points, const Matrix& centroids,
                           std::span<std::size_t> labels, std::span<double> dist2);
void centroid_means(const Matrix& points, std::span<const std::size_t> labels,
                    Matrix& centroids, std::span<std::size_t> counts);

}  // namespace omp

// Library code calls these; they forward to the OpenMP variants.
using omp::assign_nearest;
using omp::centroid_means;
using omp::cross_product;
using omp::multiply;

/// Number of threads an OpenMP region would use (1 without OpenMP).
int max_threads() noexcept;
void set_threads(int n) noexcept;

}  // namespace vulnidx::kernels
