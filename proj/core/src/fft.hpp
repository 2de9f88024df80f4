#pragma once

#include "demrep/types.hpp"

namespace demrep::detail {

// Unitary DFT: out_k = n^{-1/2} sum_j in_j exp(-2 pi i jk/n); inverse flips the sign.
// `in` and `out` may alias. Plans are cached per (n, direction) and shared by
// all threads; execution on caller buffers is thread-safe.
void unitary_dft(const Complex* in, Complex* out, Index n, bool inverse);

inline ComplexVector unitary_dft(const ComplexVector& x, bool inverse = false) {
  ComplexVector out(x.size());
  unitary_dft(x.data(), out.data(), x.size(), inverse);
  return out;
}

}  // namespace demrep::detail
