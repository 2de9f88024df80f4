#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <utility>

namespace demrep::detail {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Index n, bool inverse, bool in_place) {
    const Key key{n, inverse, in_place};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // Planning with FFTW_ESTIMATE does not touch the buffers' contents;
    // FFTW_UNALIGNED makes the plan valid for arbitrary caller arrays.
    auto* a = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* b = in_place ? a : fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), a, b,
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (b != a) fftw_free(b);
    fftw_free(a);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  using Key = std::tuple<Index, bool, bool>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void unitary_dft(const Complex* in, Complex* out, Index n, bool inverse) {
  if (n <= 0) return;
  const bool in_place = (in == out);
  fftw_plan plan = cache().get(n, inverse, in_place);
  // fftw_complex is layout-compatible with std::complex<double>.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < n; ++i) out[i] *= scale;
}

}  // namespace demrep::detail
