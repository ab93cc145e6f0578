#ifndef NAESEP_FFT_HPP
#define NAESEP_FFT_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace naesep {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place iterative radix-2 FFT. inverse=true applies the conjugate
/// transform and the 1/n scale.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= scale;
  }
}

/// Forward DFT of a real frame; returns the one-sided half (n/2+1 bins).
inline std::vector<std::complex<double>> rfft(const std::vector<double>& frame) {
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  fft_inplace(buf);
  buf.resize(frame.size() / 2 + 1);
  return buf;
}

/// Inverse of rfft: rebuilds the negative bins by conjugate symmetry.
inline std::vector<double> irfft(const std::vector<std::complex<double>>& half,
                                 std::size_t n) {
  if (half.size() != n / 2 + 1) throw std::invalid_argument("irfft: bin count mismatch");
  std::vector<std::complex<double>> buf(n);
  for (std::size_t k = 0; k < half.size(); ++k) buf[k] = half[k];
  for (std::size_t k = half.size(); k < n; ++k) buf[k] = std::conj(half[n - k]);
  fft_inplace(buf, true);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = buf[k].real();
  return out;
}

/// Full cross-correlation c(d) = sum_t a(t) b(t+d) for d in
/// [-(a.size()-1), b.size()-1], computed via FFT. Returned vector index
/// i corresponds to lag d = i - (a.size()-1).
inline std::vector<double> cross_correlation(const std::vector<double>& a,
                                             const std::vector<double>& b) {
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_power_of_two(out_len);
  std::vector<std::complex<double>> fa(n), fb(n);
  // Time-reverse a so the linear convolution yields the correlation.
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[a.size() - 1 - i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft_inplace(fa);
  fft_inplace(fb);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace naesep

#endif  // NAESEP_FFT_HPP
