#include "demrep/frames.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fft.hpp"

namespace demrep {

std::string to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::Dense: return "dense";
    case FrameKind::SubsampledDft: return "subsampled-dft";
    case FrameKind::OversampledDftToneMap: return "oversampled-dft-tone-map";
  }
  return "unknown";
}

FrameKind frame_kind_from_string(const std::string& name) {
  if (name == "dense") return FrameKind::Dense;
  if (name == "subsampled-dft") return FrameKind::SubsampledDft;
  if (name == "oversampled-dft-tone-map") return FrameKind::OversampledDftToneMap;
  throw ConfigError("unknown frame kind '" + name + "'");
}

std::string to_string(FrameFamily family) {
  switch (family) {
    case FrameFamily::Gaussian: return "gaussian";
    case FrameFamily::SubsampledDft: return "subsampled-dft";
    case FrameFamily::EquiangularParseval: return "equiangular-parseval";
  }
  return "unknown";
}

FrameFamily frame_family_from_string(const std::string& name) {
  if (name == "gaussian") return FrameFamily::Gaussian;
  if (name == "subsampled-dft" || name == "dft") return FrameFamily::SubsampledDft;
  if (name == "equiangular-parseval" || name == "equiangular") return FrameFamily::EquiangularParseval;
  throw ConfigError("unknown frame family '" + name + "'");
}

struct FrameOperator::Data {
  FrameKind kind = FrameKind::Dense;
  Index rows = 0;
  Index cols = 0;
  ComplexMatrix dense;
  std::vector<Index> rowIndices;
  Index baseLength = 0;
  int factor = 1;
  std::vector<Index> reserved;
  FrameDiagnostics diag;
};

struct FrameOperator::Cache {
  std::once_flag boundsOnce;
  FrameBounds bounds;
  std::once_flag cholOnce;
  Eigen::LLT<ComplexMatrix> llt;
  bool cholOk = false;
};

FrameOperator::FrameOperator(std::shared_ptr<const Data> data)
    : data_(std::move(data)), cache_(std::make_shared<Cache>()) {}

FrameOperator FrameOperator::from_matrix(ComplexMatrix d, FrameDiagnostics diag) {
  if (d.rows() < 1 || d.cols() < d.rows())
    throw ConfigError("frame must satisfy 1 <= M <= N, got " + std::to_string(d.rows()) + "x" +
                      std::to_string(d.cols()));
  auto data = std::make_shared<Data>();
  data->kind = FrameKind::Dense;
  data->rows = d.rows();
  data->cols = d.cols();
  data->dense = std::move(d);
  data->diag = std::move(diag);
  return FrameOperator(std::move(data));
}

namespace {

void validate_rows(std::vector<Index>& rows, Index length) {
  if (length < 1) throw ConfigError("DFT length must be positive");
  if (rows.empty()) throw ConfigError("subsampled DFT needs at least one row");
  std::sort(rows.begin(), rows.end());
  if (std::adjacent_find(rows.begin(), rows.end()) != rows.end())
    throw ConfigError("subsampled DFT rows must be distinct");
  if (rows.front() < 0 || rows.back() >= length)
    throw ConfigError("subsampled DFT row index out of range");
}

}  // namespace

FrameOperator FrameOperator::subsampled_dft(Index length, std::vector<Index> rows,
                                            FrameDiagnostics diag) {
  validate_rows(rows, length);
  auto data = std::make_shared<Data>();
  data->kind = FrameKind::SubsampledDft;
  data->rows = static_cast<Index>(rows.size());
  data->cols = length;
  data->rowIndices = std::move(rows);
  if (diag.family == "custom") diag.family = "subsampled-dft";
  data->diag = std::move(diag);
  return FrameOperator(std::move(data));
}

Index map_tone_to_oversampled(Index tone, Index base_length, int factor) {
  if (tone < 0 || tone >= base_length) throw ConfigError("tone index out of range");
  if (factor < 1) throw ConfigError("oversampling factor must be >= 1");
  const Index length = base_length * factor;
  // Bins below N/2 are non-negative frequencies; the Nyquist bin stays low.
  return (2 * tone <= base_length) ? tone : tone + (length - base_length);
}

FrameOperator FrameOperator::oversampled_tone_map(Index base_length, int factor,
                                                  std::vector<Index> reserved_tones) {
  if (factor < 1) throw ConfigError("oversampling factor must be >= 1");
  if (reserved_tones.empty()) throw ConfigError("tone map needs at least one reserved tone");
  const Index length = base_length * factor;
  std::vector<bool> free(static_cast<std::size_t>(length), false);
  for (Index t : reserved_tones) free[static_cast<std::size_t>(map_tone_to_oversampled(t, base_length, factor))] = true;
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(length));
  for (Index k = 0; k < length; ++k)
    if (!free[static_cast<std::size_t>(k)]) rows.push_back(k);
  validate_rows(rows, length);
  std::sort(reserved_tones.begin(), reserved_tones.end());

  auto data = std::make_shared<Data>();
  data->kind = FrameKind::OversampledDftToneMap;
  data->rows = static_cast<Index>(rows.size());
  data->cols = length;
  data->rowIndices = std::move(rows);
  data->baseLength = base_length;
  data->factor = factor;
  data->reserved = std::move(reserved_tones);
  data->diag.family = "oversampled-dft-tone-map";
  return FrameOperator(std::move(data));
}

Index FrameOperator::rows() const { return data_->rows; }
Index FrameOperator::cols() const { return data_->cols; }
FrameKind FrameOperator::kind() const { return data_->kind; }
const FrameDiagnostics& FrameOperator::diagnostics() const { return data_->diag; }

const ComplexMatrix& FrameOperator::matrix() const {
  if (data_->kind != FrameKind::Dense) throw ConfigError("matrix(): frame is FFT-backed");
  return data_->dense;
}

const std::vector<Index>& FrameOperator::row_indices() const {
  if (data_->kind == FrameKind::Dense) throw ConfigError("row_indices(): frame is dense");
  return data_->rowIndices;
}

Index FrameOperator::transform_length() const {
  if (data_->kind == FrameKind::Dense) throw ConfigError("transform_length(): frame is dense");
  return data_->cols;
}

Index FrameOperator::base_length() const {
  if (data_->kind != FrameKind::OversampledDftToneMap) throw ConfigError("base_length(): not a tone map");
  return data_->baseLength;
}

int FrameOperator::oversampling() const {
  if (data_->kind != FrameKind::OversampledDftToneMap) throw ConfigError("oversampling(): not a tone map");
  return data_->factor;
}

const std::vector<Index>& FrameOperator::reserved_tones() const {
  if (data_->kind != FrameKind::OversampledDftToneMap) throw ConfigError("reserved_tones(): not a tone map");
  return data_->reserved;
}

ComplexVector FrameOperator::apply(const ComplexVector& x) const {
  require_length("FrameOperator::apply", data_->cols, x.size());
  if (data_->kind == FrameKind::Dense) return data_->dense * x;
  ComplexVector spectrum = detail::unitary_dft(x, false);
  ComplexVector out(data_->rows);
  for (Index i = 0; i < data_->rows; ++i) out(i) = spectrum(data_->rowIndices[static_cast<std::size_t>(i)]);
  return out;
}

ComplexVector FrameOperator::adjoint(const ComplexVector& z) const {
  require_length("FrameOperator::adjoint", data_->rows, z.size());
  if (data_->kind == FrameKind::Dense) return data_->dense.adjoint() * z;
  ComplexVector spectrum = ComplexVector::Zero(data_->cols);
  for (Index i = 0; i < data_->rows; ++i) spectrum(data_->rowIndices[static_cast<std::size_t>(i)]) = z(i);
  detail::unitary_dft(spectrum.data(), spectrum.data(), data_->cols, true);
  return spectrum;
}

ComplexMatrix FrameOperator::materialize() const {
  if (data_->kind == FrameKind::Dense) return data_->dense;
  const Index n = data_->cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexMatrix d(data_->rows, n);
  for (Index i = 0; i < data_->rows; ++i) {
    const Index r = data_->rowIndices[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) {
      // Reduce r*j mod n before forming the angle to keep it accurate.
      const Index phase = (r * j) % n;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n);
      d(i, j) = std::polar(scale, angle);
    }
  }
  return d;
}

double FrameOperator::spectral_norm_squared() const {
  std::call_once(cache_->boundsOnce, [this] {
    if (fft_backed()) {
      cache_->bounds = {1.0, 1.0, BoundsMethod::ExactEig};
    } else {
      cache_->bounds = frame_bounds(*this, rows() <= kDenseEigenCap ? BoundsMethod::ExactEig
                                                                      : BoundsMethod::PowerIteration);
    }
  });
  return cache_->bounds.upper;
}

std::optional<double> FrameOperator::tight_constant() const {
  spectral_norm_squared();
  const auto& b = cache_->bounds;
  if (std::abs(b.upper - b.lower) <= 1e-8 * b.upper) return b.upper;
  return std::nullopt;
}

bool FrameOperator::is_parseval() const {
  const auto a = tight_constant();
  return a && std::abs(*a - 1.0) <= 1e-8;
}

ComplexVector FrameOperator::solve_gram(const ComplexVector& r) const {
  require_length("FrameOperator::solve_gram", rows(), r.size());
  if (fft_backed()) return r;  // D D^H = I for rows of a unitary DFT
  std::call_once(cache_->cholOnce, [this] {
    const ComplexMatrix gram = data_->dense * data_->dense.adjoint();
    cache_->llt.compute(gram);
    cache_->cholOk = cache_->llt.info() == Eigen::Success;
  });
  if (!cache_->cholOk) throw NumericalError("D D^H is singular (lower frame bound A = 0)");
  return cache_->llt.solve(r);
}

namespace {

// Power iteration for the largest eigenvalue of a Hermitian PSD operator,
// stopped on the residual ||G v - theta v|| <= tol * theta.
template <typename Op>
double power_iteration(const Op& op, Index dim, Rng& rng, double tol, int max_iters) {
  ComplexVector v = random_complex_normal(rng, dim);
  v.normalize();
  double theta = 0.0;
  for (int k = 0; k < max_iters; ++k) {
    ComplexVector w = op(v);
    theta = v.dot(w).real();
    const double residual = (w - theta * v).norm();
    if (residual <= tol * std::abs(theta) || w.norm() == 0.0) break;
    v = w / w.norm();
  }
  return theta;
}

}  // namespace

FrameBounds frame_bounds(const FrameOperator& frame, BoundsMethod mode) {
  const Index m = frame.rows();
  if (mode == BoundsMethod::ExactEig) {
    if (m > kDenseEigenCap)
      throw ConfigError("exact frame bounds refused: M = " + std::to_string(m) +
                        " exceeds dense cap " + std::to_string(kDenseEigenCap));
    const ComplexMatrix d = frame.materialize();
    const ComplexMatrix gram = d * d.adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition of D D^H failed");
    return {std::max(0.0, eig.eigenvalues()(0)), eig.eigenvalues()(m - 1), BoundsMethod::ExactEig};
  }

  Rng rng(0x5EEDB0D5ULL);
  constexpr double tol = 1e-8;
  constexpr int max_iters = 200000;
  auto gram = [&](const ComplexVector& v) { return frame.apply(frame.adjoint(v)); };
  const double upper = power_iteration(gram, m, rng, tol, max_iters);
  auto shifted = [&](const ComplexVector& v) -> ComplexVector { return upper * v - gram(v); };
  // The shifted spectrum may be identically zero (tight frames).
  const double gap = power_iteration(shifted, m, rng, tol, max_iters);
  double lower = upper - gap;
  if (gap <= tol * upper) lower = upper;
  return {std::max(0.0, lower), upper, BoundsMethod::PowerIteration};
}

double up_support_count(Index n, double delta) {
  const auto s = static_cast<Index>(std::floor(delta * static_cast<double>(n) + 1e-9));
  double count = 1.0;
  for (Index i = 1; i <= s; ++i)
    count = count * static_cast<double>(n - s + i) / static_cast<double>(i);
  return std::round(count);
}

UPCertificate up_check_exhaustive(const FrameOperator& frame, double delta) {
  const Index n = frame.cols();
  if (!(delta > 0.0) || delta > 1.0) throw ConfigError("UP delta must lie in (0, 1]");
  const auto s = static_cast<Index>(std::floor(delta * static_cast<double>(n) + 1e-9));
  if (s < 1) throw ConfigError("UP support budget floor(delta*N) must be at least 1");
  const double count = up_support_count(n, delta);
  if (count > kUpEnumerationBudget)
    throw BudgetError("exhaustive UP check refused: " + std::to_string(static_cast<long long>(count)) +
                          " supports exceed budget",
                      count);

  // sigma_max(D_S)^2 is the top eigenvalue of the principal submatrix G_SS of
  // G = D^H D; supersets only increase it, so size-s supports suffice.
  const ComplexMatrix d = frame.materialize();
  const ComplexMatrix gram = d.adjoint() * d;
  std::vector<Index> support(static_cast<std::size_t>(s));
  for (Index i = 0; i < s; ++i) support[static_cast<std::size_t>(i)] = i;

  double best = 0.0;
  ComplexMatrix sub(s, s);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig;
  while (true) {
    for (Index a = 0; a < s; ++a)
      for (Index b = 0; b < s; ++b)
        sub(a, b) = gram(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
    double top;
    if (s == 1) {
      top = sub(0, 0).real();
    } else if (s == 2) {
      const double p = sub(0, 0).real();
      const double q = sub(1, 1).real();
      top = 0.5 * (p + q) + std::sqrt(0.25 * (p - q) * (p - q) + std::norm(sub(0, 1)));
    } else {
      eig.compute(sub, Eigen::EigenvaluesOnly);
      top = eig.eigenvalues()(s - 1);
    }
    best = std::max(best, top);

    // Next combination in lexicographic order.
    Index i = s - 1;
    while (i >= 0 && support[static_cast<std::size_t>(i)] == n - s + i) --i;
    if (i < 0) break;
    ++support[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < s; ++j)
      support[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(j - 1)] + 1;
  }

  UPCertificate cert;
  cert.eta = std::sqrt(std::max(0.0, best));
  cert.delta = delta;
  cert.exhaustive = true;
  cert.supportBudget = s;
  cert.supportsChecked = count;
  return cert;
}

double welch_bound(Index n, Index m) {
  if (n <= 1 || m >= n) return 0.0;
  return std::sqrt(static_cast<double>(n - m) / (static_cast<double>(m) * static_cast<double>(n - 1)));
}

}  // namespace demrep
