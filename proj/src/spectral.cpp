#include "dgles/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include "dgles/error.hpp"

namespace dgles {

std::string_view to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::Hamming: return "Hamming";
    case WindowKind::Hann: return "Hann";
    case WindowKind::Rectangular: return "Rectangular";
  }
  return "?";
}

WindowKind parse_window(std::string_view name) {
  if (name == "Hamming") return WindowKind::Hamming;
  if (name == "Hann") return WindowKind::Hann;
  if (name == "Rectangular") return WindowKind::Rectangular;
  throw ConfigError("unknown window '" + std::string(name) +
                    "'; expected Hamming, Hann or Rectangular");
}

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2 || kind == WindowKind::Rectangular) return w;
  const double a0 = kind == WindowKind::Hamming ? 0.54 : 0.5;
  const double a1 = 1.0 - a0;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = a0 - a1 * std::cos(2.0 * std::numbers::pi * double(i) / double(n - 1));
  return w;
}

void PsdConfig::validate() const {
  if (segment_length == 0) throw ConfigError("psd segment_length must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw ConfigError("psd overlap must lie in [0, 1)");
  if (!(dt > 0.0)) throw ConfigError("psd sampling interval must be positive");
  if (!(chord > 0.0) || !(velocity > 0.0))
    throw ConfigError("psd chord and velocity must be positive");
}

namespace {
// FFTW planning is not thread-safe.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

PsdResult welch_psd(std::span<const double> signal, const PsdConfig& config) {
  config.validate();
  const std::size_t L = config.segment_length;
  if (signal.size() < L)
    throw InsufficientDataError("signal has " + std::to_string(signal.size()) +
                                " samples, shorter than one segment of " + std::to_string(L));
  const std::size_t overlap =
      static_cast<std::size_t>(std::floor(config.overlap_fraction * double(L)));
  const std::size_t hop = L - overlap;
  const std::size_t segments = (signal.size() - overlap) / hop;
  const auto window = make_window(config.window, L);
  double wsum2 = 0.0;
  for (double w : window) wsum2 += w * w;
  const double fs = 1.0 / config.dt;
  const std::size_t nbins = L / 2 + 1;

  std::vector<double> in(L);
  std::vector<std::complex<double>> out(nbins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  std::vector<double> acc(nbins, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t start = s * hop;
    for (std::size_t i = 0; i < L; ++i) in[i] = signal[start + i] * window[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < nbins; ++k) acc[k] += std::norm(out[k]);
  }
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }

  PsdResult r;
  r.segments = segments;
  r.df = fs / double(L);
  r.frequency.resize(nbins);
  r.strouhal.resize(nbins);
  r.power.resize(nbins);
  const double scale = 1.0 / (fs * wsum2 * double(segments));
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool edge = k == 0 || (L % 2 == 0 && k == L / 2);
    r.power[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
    r.frequency[k] = double(k) * r.df;
    r.strouhal[k] = r.frequency[k] * config.chord / config.velocity;
  }
  return r;
}

PsdResult welch_psd(std::span<const double> times, std::span<const double> signal,
                    PsdConfig config) {
  if (times.size() != signal.size())
    throw SamplingError("time and signal columns differ in length");
  if (times.size() < 2) throw InsufficientDataError("need at least two samples");
  const double dt = (times.back() - times.front()) / double(times.size() - 1);
  if (!(dt > 0.0)) throw SamplingError("timestamps are not increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (std::abs(step - dt) > 1e-6 * dt)
      throw SamplingError("non-uniform sampling at sample " + std::to_string(i) +
                          ": interval " + std::to_string(step) + " vs mean " +
                          std::to_string(dt));
  }
  config.dt = dt;
  return welch_psd(signal, config);
}

std::vector<SpectralPeak> dominant_peaks(const PsdResult& result, int k) {
  if (k < 1) throw ConfigError("number of peaks must be at least 1");
  const auto& p = result.power;
  std::vector<SpectralPeak> peaks;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (!(p[i] > p[i - 1] && p[i] >= p[i + 1])) continue;
    // Prominence: height above the higher of the two flanking minima, each
    // taken up to the nearest strictly higher sample (or the array end).
    double left_min = p[i];
    for (std::size_t j = i; j-- > 0;) {
      if (p[j] > p[i]) break;
      left_min = std::min(left_min, p[j]);
    }
    double right_min = p[i];
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (p[j] > p[i]) break;
      right_min = std::min(right_min, p[j]);
    }
    peaks.push_back({i, result.strouhal.empty() ? 0.0 : result.strouhal[i], p[i],
                     p[i] - std::max(left_min, right_min)});
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const auto& a, const auto& b) { return a.prominence > b.prominence; });
  if (peaks.size() > std::size_t(k)) peaks.resize(k);
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const auto& a, const auto& b) { return a.power > b.power; });
  return peaks;
}

}  // namespace dgles
