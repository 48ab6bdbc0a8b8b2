#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace csmlab::detail {
namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

const PlanPair& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;

  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const std::size_t real_size = static_cast<std::size_t>(n) * n;
  const std::size_t half_size = static_cast<std::size_t>(n) * (n / 2 + 1);
  std::unique_ptr<double, decltype(&fftw_free)> real(fftw_alloc_real(real_size), &fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> half(fftw_alloc_complex(half_size), &fftw_free);

  PlanPair plans;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans.r2c = fftw_plan_dft_r2c_2d(n, n, real.get(), half.get(), flags);
  plans.c2r = fftw_plan_dft_c2r_2d(n, n, half.get(), real.get(), flags | FFTW_DESTROY_INPUT);
  return cache.emplace(n, plans).first->second;
}

}  // namespace

void fft_r2c(int n, std::span<const double> in, std::span<std::complex<double>> out) {
  const auto& plans = plans_for(n);
  // r2c never writes to its input.
  fftw_execute_dft_r2c(plans.r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void fft_c2r(int n, std::span<std::complex<double>> in, std::span<double> out) {
  const auto& plans = plans_for(n);
  fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace csmlab::detail
