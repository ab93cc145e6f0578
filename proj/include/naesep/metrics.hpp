#ifndef NAESEP_METRICS_HPP
#define NAESEP_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "naesep/fft.hpp"
#include "naesep/matrix.hpp"
#include "naesep/wav.hpp"

namespace naesep {

/// Replaces +inf dB for exact matches; keeps CSV output finite.
inline constexpr double kMetricCapDb = 150.0;

struct EvalResult {
  std::vector<double> sdr;  // per source, dB
  std::vector<double> sir;
  std::vector<double> sar;
};

namespace bss_detail {

inline double db_ratio(double num, double den) {
  if (num <= 0.0) return -kMetricCapDb;
  if (den <= 0.0) return kMetricCapDb;
  const double v = 10.0 * std::log10(num / den);
  return std::clamp(v, -kMetricCapDb, kMetricCapDb);
}

inline double energy(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// y(t) = sum_tau coeffs[tau] * s(t - tau), output length n + taps - 1.
inline void apply_fir(const std::vector<double>& s, const double* coeffs, std::size_t taps,
                      std::vector<double>& y) {
  for (std::size_t tau = 0; tau < taps; ++tau) {
    const double c = coeffs[tau];
    if (c == 0.0) continue;
    for (std::size_t t = 0; t < s.size(); ++t) y[t + tau] += c * s[t];
  }
}

}  // namespace bss_detail

/// BSS_EVAL-style decomposition. The estimate is split into
///   s_target : least-squares projection onto 0..filter_len-1 sample delays
///              of its own reference,
///   e_interf : the extra component captured by projecting onto all
///              references' delay subspace,
///   e_artif  : the remainder,
/// and SDR/SIR/SAR are the usual energy ratios in dB, capped at +-150.
/// Source correspondence is fixed (estimate i vs reference i); no
/// permutation search.
inline EvalResult bss_eval(const std::vector<Waveform>& estimates,
                           const std::vector<Waveform>& references,
                           std::size_t filter_len = 512) {
  using namespace bss_detail;
  if (estimates.size() != references.size() || estimates.empty())
    throw std::invalid_argument("bss_eval: estimate/reference counts differ");
  if (filter_len < 1) throw std::invalid_argument("bss_eval: filter_len must be >= 1");

  const std::size_t nsrc = references.size();
  std::size_t n = 0;
  for (const auto& w : estimates) n = std::max(n, w.samples.size());
  for (const auto& w : references) n = std::max(n, w.samples.size());
  if (n == 0) throw std::invalid_argument("bss_eval: empty signals");

  std::vector<std::vector<double>> refs(nsrc), ests(nsrc);
  for (std::size_t i = 0; i < nsrc; ++i) {
    refs[i].assign(n, 0.0);
    std::copy(references[i].samples.begin(), references[i].samples.end(), refs[i].begin());
    if (energy(refs[i]) <= 0.0)
      throw std::invalid_argument("bss_eval: silent reference " + std::to_string(i));
    ests[i].assign(n + filter_len - 1, 0.0);
    std::copy(estimates[i].samples.begin(), estimates[i].samples.end(), ests[i].begin());
  }

  const std::size_t lf = filter_len;
  // Pairwise reference correlations c_ij(d) = sum_t s_i(t) s_j(t+d),
  // needed at lags |d| < lf. The Gram matrix of the delayed references is
  // block Toeplitz in these values.
  std::vector<std::vector<std::vector<double>>> corr(nsrc,
      std::vector<std::vector<double>>(nsrc));
  for (std::size_t i = 0; i < nsrc; ++i)
    for (std::size_t j = 0; j < nsrc; ++j) corr[i][j] = cross_correlation(refs[i], refs[j]);
  const std::size_t zero_lag = n - 1;  // index of lag 0 in corr vectors

  const std::size_t dim = nsrc * lf;
  Matrix gram(dim, dim, 0.0);
  for (std::size_t i = 0; i < nsrc; ++i)
    for (std::size_t ti = 0; ti < lf; ++ti)
      for (std::size_t j = 0; j < nsrc; ++j)
        for (std::size_t tj = 0; tj < lf; ++tj) {
          const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(ti) -
                                   static_cast<std::ptrdiff_t>(tj);
          gram(i * lf + ti, j * lf + tj) = corr[i][j][zero_lag + d];
        }

  double trace = 0.0;
  for (std::size_t k = 0; k < dim; ++k) trace += gram(k, k);
  double reg = 1e-10 * trace / static_cast<double>(dim);

  EvalResult result;
  for (std::size_t src = 0; src < nsrc; ++src) {
    // Right-hand side: correlations of the estimate with every delayed ref.
    std::vector<double> rhs_all(dim, 0.0);
    for (std::size_t j = 0; j < nsrc; ++j) {
      const std::vector<double> c = cross_correlation(refs[j], ests[src]);
      for (std::size_t tau = 0; tau < lf; ++tau) rhs_all[j * lf + tau] = c[n - 1 + tau];
    }

    auto solve_reg = [&](const Matrix& g, std::vector<double> b) {
      double r = reg;
      for (int attempt = 0; attempt < 6; ++attempt) {
        Matrix gr = g;
        for (std::size_t k = 0; k < gr.rows(); ++k) gr(k, k) += r;
        try {
          return spd_solve(gr, b);
        } catch (const std::runtime_error&) {
          std::cerr << "bss_eval: warning: near-singular projection system, "
                       "raising regularization\n";
          r *= 1e3;
        }
      }
      throw std::runtime_error("bss_eval: projection system is rank deficient");
    };

    const std::vector<double> coeffs_all = solve_reg(gram, rhs_all);

    // Own-reference projection for s_target.
    Matrix gram_own(lf, lf, 0.0);
    for (std::size_t ti = 0; ti < lf; ++ti)
      for (std::size_t tj = 0; tj < lf; ++tj)
        gram_own(ti, tj) = gram(src * lf + ti, src * lf + tj);
    std::vector<double> rhs_own(rhs_all.begin() + static_cast<std::ptrdiff_t>(src * lf),
                                rhs_all.begin() + static_cast<std::ptrdiff_t>((src + 1) * lf));
    const std::vector<double> coeffs_own = solve_reg(gram_own, rhs_own);

    std::vector<double> s_target(n + lf - 1, 0.0);
    apply_fir(refs[src], coeffs_own.data(), lf, s_target);
    std::vector<double> p_all(n + lf - 1, 0.0);
    for (std::size_t j = 0; j < nsrc; ++j)
      apply_fir(refs[j], coeffs_all.data() + j * lf, lf, p_all);

    double e_target = 0.0, e_interf = 0.0, e_artif = 0.0, e_full = 0.0;
    for (std::size_t t = 0; t < p_all.size(); ++t) {
      const double interf = p_all[t] - s_target[t];
      const double artif = ests[src][t] - p_all[t];
      e_target += s_target[t] * s_target[t];
      e_interf += interf * interf;
      e_artif += artif * artif;
      e_full += p_all[t] * p_all[t];
    }

    result.sdr.push_back(db_ratio(e_target, e_interf + e_artif));
    result.sir.push_back(db_ratio(e_target, e_interf));
    result.sar.push_back(db_ratio(e_full, e_artif));
  }
  return result;
}

/// Quantile with linear interpolation between order statistics (R type 7).
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(v.begin(), v.end());
  const double idx = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct MetricSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct EvalSummary {
  MetricSummary sdr, sir, sar;
  std::size_t count = 0;
  // Quartile convention recorded alongside the numbers.
  std::string quartile_method = "linear-interpolation (R type 7)";
};

/// Pools all per-source values across results and reports per-metric median
/// plus interquartile range.
inline EvalSummary median_aggregate(const std::vector<EvalResult>& results) {
  if (results.empty()) throw std::invalid_argument("median_aggregate: empty input");
  std::vector<double> sdr, sir, sar;
  for (const EvalResult& r : results) {
    sdr.insert(sdr.end(), r.sdr.begin(), r.sdr.end());
    sir.insert(sir.end(), r.sir.begin(), r.sir.end());
    sar.insert(sar.end(), r.sar.begin(), r.sar.end());
  }
  auto summarize = [](const std::vector<double>& v) {
    MetricSummary s;
    s.median = quantile(v, 0.5);
    s.q1 = quantile(v, 0.25);
    s.q3 = quantile(v, 0.75);
    return s;
  };
  EvalSummary out;
  out.sdr = summarize(sdr);
  out.sir = summarize(sir);
  out.sar = summarize(sar);
  out.count = sdr.size();
  return out;
}

}  // namespace naesep

#endif  // NAESEP_METRICS_HPP
