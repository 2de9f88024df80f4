#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "demrep/frames.hpp"

namespace demrep {

namespace {

void check_dims(Index n, Index m) {
  if (m < 1 || n < 1 || m > n)
    throw ConfigError("frame dimensions must satisfy 1 <= M <= N, got M=" + std::to_string(m) +
                      ", N=" + std::to_string(n));
}

ComplexMatrix gaussian_matrix(Rng& rng, Index m, Index n, double variance) {
  ComplexMatrix a(m, n);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = rng.complex_normal(variance);
  return a;
}

double gram_coherence(const ComplexMatrix& gram) {
  const Index n = gram.rows();
  double worst = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double djj = gram(j, j).real();
    for (Index i = 0; i < j; ++i) {
      const double denom = std::sqrt(gram(i, i).real() * djj);
      if (denom > 0.0) worst = std::max(worst, std::abs(gram(i, j)) / denom);
    }
  }
  return worst;
}

}  // namespace

FrameOperator build_subsampled_dft(Index n, Index m, Rng& rng) {
  check_dims(n, m);
  FrameDiagnostics diag;
  diag.family = "subsampled-dft";
  return FrameOperator::subsampled_dft(n, random_subset(rng, n, m), std::move(diag));
}

FrameOperator build_gaussian(Index n, Index m, Rng& rng) {
  check_dims(n, m);
  FrameDiagnostics diag;
  diag.family = "gaussian";
  return FrameOperator::from_matrix(gaussian_matrix(rng, m, n, 1.0 / static_cast<double>(n)),
                                    std::move(diag));
}

FrameOperator build_equiangular_parseval(Index n, Index m, Rng& rng, int iters) {
  check_dims(n, m);
  if (iters < 1) throw ConfigError("equiangular construction needs iters >= 1");

  FrameDiagnostics diag;
  diag.family = "equiangular-parseval";
  diag.welchBound = welch_bound(n, m);

  if (m == n) {
    Eigen::HouseholderQR<ComplexMatrix> qr(gaussian_matrix(rng, n, n, 1.0));
    ComplexMatrix q = qr.householderQ();
    diag.coherence = gram_coherence(q.adjoint() * q);
    return FrameOperator::from_matrix(std::move(q), std::move(diag));
  }

  const double mu = *diag.welchBound;
  const double level = static_cast<double>(n) / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig;

  // Start from the tight Gram of a whitened Gaussian frame.
  const ComplexMatrix a = gaussian_matrix(rng, m, n, 1.0);
  eig.compute(a * a.adjoint());
  const ComplexMatrix whiten =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
      eig.eigenvectors().adjoint();
  ComplexMatrix basis = (whiten * a).adjoint();  // N x M, orthonormal columns
  ComplexMatrix gram = level * basis * basis.adjoint();

  ComplexMatrix best_basis = basis;
  double best_coherence = gram_coherence(gram);
  bool converged = best_coherence <= mu * (1.0 + 1e-4);
  int sweep = 0;

  for (; sweep < iters && !converged; ++sweep) {
    // Structural set: unit diagonal, off-diagonal moduli clipped to the Welch bound.
    for (Index j = 0; j < n; ++j) {
      gram(j, j) = 1.0;
      for (Index i = 0; i < j; ++i) {
        Complex g = gram(i, j);
        const double r = std::abs(g);
        if (r > mu) g *= mu / r;
        gram(i, j) = g;
        gram(j, i) = std::conj(g);
      }
    }
    // Spectral set: rank M, nonzero eigenvalues equal to N/M.
    eig.compute(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("equiangular construction: eigensolver failed");
    basis = eig.eigenvectors().rightCols(m);
    gram.noalias() = level * basis * basis.adjoint();

    const double coherence = gram_coherence(gram);
    if (coherence < best_coherence) {
      best_coherence = coherence;
      best_basis = basis;
    }
    converged = coherence <= mu * (1.0 + 1e-4);
  }

  diag.coherence = best_coherence;
  diag.constructionConverged = converged;
  diag.sweeps = sweep;
  return FrameOperator::from_matrix(best_basis.adjoint(), std::move(diag));
}

FrameOperator build_frame(FrameFamily family, Index n, Index m, std::uint64_t seed,
                          int equiangular_iters) {
  Rng rng(seed);
  auto attach_seed = [seed](FrameOperator f) {
    auto diag = f.diagnostics();
    diag.seed = seed;
    if (f.kind() == FrameKind::Dense) return FrameOperator::from_matrix(f.matrix(), std::move(diag));
    return FrameOperator::subsampled_dft(f.transform_length(), f.row_indices(), std::move(diag));
  };
  switch (family) {
    case FrameFamily::Gaussian: return attach_seed(build_gaussian(n, m, rng));
    case FrameFamily::SubsampledDft: return attach_seed(build_subsampled_dft(n, m, rng));
    case FrameFamily::EquiangularParseval:
      return attach_seed(build_equiangular_parseval(n, m, rng, equiangular_iters));
  }
  throw ConfigError("unknown frame family");
}

}  // namespace demrep
