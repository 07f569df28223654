#pragma once

#include <vector>

#include "vulnidx/matrix.hpp"

namespace vulnidx {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
///
/// Sweeps over all (p, q) pairs in row order until the off-diagonal Frobenius
/// norm drops below `relative_tolerance` * ||A||_F. Eigenpairs come back sorted
/// by descending eigenvalue; exact ties are ordered by the index of the first
/// nonzero eigenvector entry. Each eigenvector is normalized so that its entry
/// of largest magnitude (first one on ties) is positive.
///
/// Throws Error(no_convergence) after `max_sweeps` sweeps and
/// Error(precondition) for a non-square or non-symmetric input.
EigenDecomposition jacobi_eigen(const Matrix& a, int max_sweeps = 100,
                                double relative_tolerance = 1e-12);

}  // namespace vulnidx
