#include <algorithm>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vulnidx/error.hpp"
#include "vulnidx/kernels.hpp"

namespace vulnidx::kernels {

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) noexcept {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace omp {

Matrix cross_product(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  const Matrix cols = x.transposed();
  Matrix out(p, p);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(p); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto ci = cols.row(i);
    for (std::size_t j = i; j < p; ++j) {
      const auto cj = cols.row(j);
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += ci[r] * cj[r];
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::precondition, "multiply: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(a.rows()); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    for (std::size_t c = 0; c < b.cols(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  }
  return out;
}

std::size_t assign_nearest(const Matrix& points, const Matrix& centroids,
                           std::span<std::size_t> labels, std::span<double> dist2) {
  std::size_t changed = 0;
#pragma omp parallel for schedule(static) reduction(+ : changed)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(points.rows()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto x = points.row(i);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const auto m = centroids.row(c);
      double d = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - m[k];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (labels[i] != best) ++changed;
    labels[i] = best;
    dist2[i] = best_d;
  }
  return changed;
}

void centroid_means(const Matrix& points, std::span<const std::size_t> labels,
                    Matrix& centroids, std::span<std::size_t> counts) {
  std::fill(centroids.data().begin(), centroids.data().end(), 0.0);
  std::fill(counts.begin(), counts.end(), std::size_t{0});
  for (std::size_t i = 0; i < points.rows(); ++i) ++counts[labels[i]];

  // One coordinate per task; points are visited in order, as in the serial loop.
  const std::size_t dims = points.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(dims); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    for (std::size_t i = 0; i < points.rows(); ++i) centroids(labels[i], k) += points(i, k);
    for (std::size_t c = 0; c < centroids.rows(); ++c)
      if (counts[c]) centroids(c, k) /= static_cast<double>(counts[c]);
  }
}

}  // namespace omp
}  // namespace vulnidx::kernels
