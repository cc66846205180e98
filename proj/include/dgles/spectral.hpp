#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dgles {

enum class WindowKind { Hamming, Hann, Rectangular };

std::string_view to_string(WindowKind kind);
WindowKind parse_window(std::string_view name);

/// Symmetric window of length n.
std::vector<double> make_window(WindowKind kind, std::size_t n);

struct PsdConfig {
  std::size_t segment_length = 62500;
  double overlap_fraction = 0.5;
  WindowKind window = WindowKind::Hamming;
  double dt = 1.0;  // sampling interval
  double chord = 1.0;
  double velocity = 1.0;

  /// Throws ConfigError on a zero segment, overlap outside [0, 1) or dt <= 0.
  void validate() const;
};

struct PsdResult {
  std::vector<double> frequency;
  std::vector<double> strouhal;  // f c / U
  std::vector<double> power;     // one-sided density
  double df = 0.0;
  std::size_t segments = 0;
};

/// Welch averaged periodogram: segments of segment_length overlapping by
/// floor(overlap * segment_length) samples, windowed, one-sided density
/// |X|^2 / (fs sum w^2) with interior bins doubled. Throws
/// InsufficientDataError when the signal is shorter than one segment.
PsdResult welch_psd(std::span<const double> signal, const PsdConfig& config);

/// Same, with timestamps; the sampling interval is taken from them and
/// non-uniform sampling raises SamplingError.
PsdResult welch_psd(std::span<const double> times, std::span<const double> signal,
                    PsdConfig config);

struct SpectralPeak {
  std::size_t bin = 0;
  double strouhal = 0.0;
  double power = 0.0;
  double prominence = 0.0;
};

/// Top-k interior local maxima by prominence, returned in decreasing power.
/// Throws ConfigError for k < 1.
std::vector<SpectralPeak> dominant_peaks(const PsdResult& result, int k);

}  // namespace dgles
