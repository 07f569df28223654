#include <algorithm>
#include <limits>

#include "vulnidx/error.hpp"
#include "vulnidx/kernels.hpp"

namespace vulnidx::kernels::serial {

Matrix cross_product(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  const Matrix cols = x.transposed();  // contiguous columns
  Matrix out(p, p);
  for (std::size_t i = 0; i < p; ++i) {
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
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  return out;
}

std::size_t assign_nearest(const Matrix& points, const Matrix& centroids,
                           std::span<std::size_t> labels, std::span<double> dist2) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
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
  for (std::size_t i = 0; i < points.rows(); ++i) {
    ++counts[labels[i]];
    auto c = centroids.row(labels[i]);
    const auto x = points.row(i);
    for (std::size_t k = 0; k < x.size(); ++k) c[k] += x[k];
  }
  for (std::size_t c = 0; c < centroids.rows(); ++c)
    if (counts[c])
      for (auto& v : centroids.row(c)) v /= static_cast<double>(counts[c]);
}

}  // namespace vulnidx::kernels::serial
