// Thin FFTW wrapper. Plans are created once per grid size under a lock and
// executed through the new-array interface, which FFTW guarantees thread-safe.
#pragma once

#include <complex>
#include <span>

namespace csmlab::detail {

/// Unnormalised real-to-half-complex transform of an n x n row-major array.
/// `out` holds n * (n/2 + 1) values.
void fft_r2c(int n, std::span<const double> in, std::span<std::complex<double>> out);

/// Inverse of fft_r2c without the 1/n^2 factor. `in` is consumed.
void fft_c2r(int n, std::span<std::complex<double>> in, std::span<double> out);

}  // namespace csmlab::detail
