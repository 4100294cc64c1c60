#include "hypdec/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace hypdec::fft {

namespace {

// FFTW plan creation is not thread safe; executions via the new-array
// interface are. Plans are cached per shape and reused.
std::mutex plan_mutex;

fftw_plan get_plan2(int n1, int n2, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(n1, n2, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n1) * n2);
  fftw_plan p = fftw_plan_dft_2d(n1, n2, buf, buf,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  fftw_free(buf);
  cache[key] = p;
  return p;
}

fftw_plan get_plan1(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n));
  fftw_plan p = fftw_plan_dft_1d(n, buf, buf,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  fftw_free(buf);
  cache[key] = p;
  return p;
}

}  // namespace

void dft2(cd* data, int n1, int n2, int sign) {
  fftw_plan p = get_plan2(n1, n2, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}

void dft1(cd* data, int n, int sign) {
  fftw_plan p = get_plan1(n, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}

void czt_line(const cd* in, int nin, double xi0, double dxi, cd* out, int nout,
              double x0, double dx) {
  // out[k] = e^{i x_k xi0} * sum_m a_m e^{i k m phi},
  // a_m = in[m] e^{i x0 m dxi}, phi = dx*dxi.
  // Bluestein: k*m = (k^2 + m^2 - (k-m)^2)/2.
  const double phi = dx * dxi;
  const int L = next_pow2(nin + nout);
  std::vector<cd> a(L, cd{0, 0}), b(L, cd{0, 0});
  auto chirp = [&](long long idx) {
    // e^{+i phi idx^2 / 2}; reduce idx^2/2 * phi mod 2pi carefully enough
    // for the desk sizes used here (idx < 2^22).
    double ang = 0.5 * phi * static_cast<double>(idx) * static_cast<double>(idx);
    return cd{std::cos(ang), std::sin(ang)};
  };
  for (int m = 0; m < nin; ++m) {
    double ang = x0 * m * dxi;
    a[m] = in[m] * cd{std::cos(ang), std::sin(ang)} * chirp(m);
  }
  // b holds e^{-i phi j^2/2} laid out for circular convolution
  for (int j = 0; j < std::max(nin, nout); ++j) {
    cd v = std::conj(chirp(j));
    b[j] = v;
    if (j > 0) b[L - j] = v;
  }
  dft1(a.data(), L, -1);
  dft1(b.data(), L, -1);
  for (int i = 0; i < L; ++i) a[i] *= b[i];
  dft1(a.data(), L, +1);
  const double inv = 1.0 / L;
  for (int k = 0; k < nout; ++k) {
    double ang = (x0 + k * dx) * xi0;
    out[k] = a[k] * inv * chirp(k) * cd{std::cos(ang), std::sin(ang)};
  }
}

}  // namespace hypdec::fft
