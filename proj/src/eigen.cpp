#include "vulnidx/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vulnidx/error.hpp"

namespace vulnidx {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

// Zeroes a(p, q) with one plane rotation and accumulates it into v.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    const double arp = a(r, p), arq = a(r, q);
    a(r, p) = a(p, r) = c * arp - s * arq;
    a(r, q) = a(q, r) = c * arq + s * arp;
  }
  for (std::size_t r = 0; r < n; ++r) {
    const double vrp = v(r, p), vrq = v(r, q);
    v(r, p) = c * vrp - s * vrq;
    v(r, q) = s * vrp + c * vrq;
  }
}

}  // namespace

EigenDecomposition jacobi_eigen(const Matrix& input, int max_sweeps, double relative_tolerance) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw Error(Errc::precondition, "eigensolver needs a square matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(input(i, j) - input(j, i)) > 1e-12 * (std::abs(input(i, j)) + 1.0))
        throw Error(Errc::precondition, "eigensolver needs a symmetric matrix");

  Matrix a = input;
  Matrix v = Matrix::identity(n);
  const double target = relative_tolerance * frobenius_norm(input);

  int sweeps = 0;
  while (off_diagonal_norm(a) >= target && target > 0) {
    if (sweeps == max_sweeps)
      throw Error(Errc::no_convergence,
                  "Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) + " sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
    ++sweeps;
  }

  // Sign convention: largest |entry| of each vector is positive.
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(v(r, c)) > std::abs(v(arg, c))) arg = r;
    if (v(arg, c) < 0)
      for (std::size_t r = 0; r < n; ++r) v(r, c) = -v(r, c);
  }

  auto first_nonzero = [&](std::size_t c) {
    for (std::size_t r = 0; r < n; ++r)
      if (v(r, c) != 0.0) return r;
    return n;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
    return first_nonzero(x) < first_nonzero(y);
  });

  EigenDecomposition out;
  out.sweeps = sweeps;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

}  // namespace vulnidx
