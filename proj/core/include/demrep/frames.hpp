#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "demrep/rng.hpp"
#include "demrep/types.hpp"

namespace demrep {

enum class FrameKind { Dense, SubsampledDft, OversampledDftToneMap };

std::string to_string(FrameKind kind);
FrameKind frame_kind_from_string(const std::string& name);

/// Random families used by the experiment harness.
enum class FrameFamily { Gaussian, SubsampledDft, EquiangularParseval };

std::string to_string(FrameFamily family);
FrameFamily frame_family_from_string(const std::string& name);

/// Provenance and construction diagnostics carried along with a frame.
struct FrameDiagnostics {
  std::string family = "custom";
  std::optional<std::uint64_t> seed;
  /// Max |<d_i, d_j>| / (|d_i||d_j|) over distinct columns (equiangular builder only).
  std::optional<double> coherence;
  std::optional<double> welchBound;
  /// False when an iterative construction stopped at its sweep cap.
  bool constructionConverged = true;
  int sweeps = 0;
};

/// Largest M for which dense eigen-decompositions of D D^H are attempted.
inline constexpr Index kDenseEigenCap = 2048;

/// An M x N linear map D (M <= N) with forward and adjoint application.
///
/// Immutable after construction and cheap to copy (shared state). The lazily
/// computed spectral data and the Cholesky factor of D D^H are built once under
/// std::call_once, so a frame can be shared read-only across threads.
class FrameOperator {
 public:
  static FrameOperator from_matrix(ComplexMatrix d, FrameDiagnostics diag = {});

  /// Rows `rows` (distinct, in [0, length)) of the unitary length-point DFT.
  static FrameOperator subsampled_dft(Index length, std::vector<Index> rows,
                                      FrameDiagnostics diag = {});

  /// Constraint map of the oversampled tone-reservation problem: all bins of the
  /// unitary (factor * base_length)-point DFT except the reserved tones, which are
  /// given on the base grid and mapped with map_tone_to_oversampled().
  static FrameOperator oversampled_tone_map(Index base_length, int factor,
                                            std::vector<Index> reserved_tones);

  Index rows() const;
  Index cols() const;
  double redundancy() const { return static_cast<double>(cols()) / static_cast<double>(rows()); }
  FrameKind kind() const;
  bool fft_backed() const { return kind() != FrameKind::Dense; }

  ComplexVector apply(const ComplexVector& x) const;
  ComplexVector adjoint(const ComplexVector& z) const;

  /// Dense copy of D (M x N).
  ComplexMatrix materialize() const;

  /// Backing matrix; Dense kind only.
  const ComplexMatrix& matrix() const;
  /// Selected DFT rows; FFT-backed kinds only.
  const std::vector<Index>& row_indices() const;
  /// DFT length (equals cols()); FFT-backed kinds only.
  Index transform_length() const;
  /// Tone-map kind only.
  Index base_length() const;
  int oversampling() const;
  const std::vector<Index>& reserved_tones() const;

  const FrameDiagnostics& diagnostics() const;

  /// ||D||_2^2, i.e. the upper frame bound B. Cached.
  double spectral_norm_squared() const;
  /// The common bound A = B when the frame is tight to 1e-8 relative. Cached.
  std::optional<double> tight_constant() const;
  bool is_parseval() const;

  /// Solves (D D^H) s = r via a cached Cholesky factor. Throws NumericalError
  /// when D D^H is singular.
  ComplexVector solve_gram(const ComplexVector& r) const;

 private:
  struct Data;
  struct Cache;
  FrameOperator(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
  std::shared_ptr<Cache> cache_;
};

/// Maps a tone index of the N-grid (FFT ordering) to the centered factor*N grid:
/// non-negative frequencies keep their index, negative ones move to the top.
Index map_tone_to_oversampled(Index tone, Index base_length, int factor);

enum class BoundsMethod { ExactEig, PowerIteration };

struct FrameBounds {
  double lower = 0.0;  // A
  double upper = 0.0;  // B
  BoundsMethod method = BoundsMethod::ExactEig;
};

/// Tightest frame bounds: extreme eigenvalues of D D^H.
///
/// Exact mode eigen-decomposes D D^H and is refused (ConfigError) for
/// M > kDenseEigenCap. Estimate mode runs seeded power iteration for B and
/// shifted power iteration on B I - D D^H for A, to 1e-8 relative.
FrameBounds frame_bounds(const FrameOperator& frame, BoundsMethod mode = BoundsMethod::ExactEig);

struct UPCertificate {
  double eta = 0.0;
  double delta = 0.0;
  bool exhaustive = false;
  Index supportBudget = 0;  // floor(delta * N)
  double supportsChecked = 0;
};

inline constexpr double kUpEnumerationBudget = 1e6;

/// Number of supports up_check_exhaustive() would enumerate.
double up_support_count(Index n, double delta);

/// Smallest eta with ||D x|| <= eta ||x|| for every x supported on at most
/// floor(delta N) columns, by enumerating all supports of that size.
/// Throws BudgetError when C(N, floor(delta N)) exceeds kUpEnumerationBudget.
UPCertificate up_check_exhaustive(const FrameOperator& frame, double delta);

/// Welch lower bound on the coherence of N unit vectors in C^M.
double welch_bound(Index n, Index m);

FrameOperator build_subsampled_dft(Index n, Index m, Rng& rng);
FrameOperator build_gaussian(Index n, Index m, Rng& rng);
/// Alternating projection between the Welch-bounded unit-diagonal Gram matrices
/// and rank-M tight Grams. The returned frame is exactly Parseval; achieved
/// coherence and a convergence flag are reported in diagnostics().
FrameOperator build_equiangular_parseval(Index n, Index m, Rng& rng, int iters);

FrameOperator build_frame(FrameFamily family, Index n, Index m, std::uint64_t seed,
                          int equiangular_iters = 200);

}  // namespace demrep
