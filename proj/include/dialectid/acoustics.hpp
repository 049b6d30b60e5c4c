#pragma once

// Raw acoustic measurements of a vowel: formant tracks (LPC), pitch track
// (autocorrelation), frame log-energy and mean intensity.

#include <complex>
#include <span>
#include <vector>

#include "dialectid/audio.hpp"

namespace dialectid {

inline constexpr double kLogFloor = 1e-12;
inline constexpr double kIntensityReference = 2e-5;

struct FormantConfig {
  int analysis_rate = 10000;
  double pre_emphasis_hz = 50.0;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int lpc_order = 12;
  double min_frequency_hz = 90.0;
  double max_frequency_hz = 4500.0;
  double max_bandwidth_hz = 400.0;
};

struct PitchConfig {
  double frame_ms = 40.0;
  double hop_ms = 10.0;
  double min_f0_hz = 75.0;
  double max_f0_hz = 500.0;
  double voicing_threshold = 0.45;
  double silence_gate = 0.01;  // relative to the loudest frame's RMS
  double clip_level = 0.5;     // center clip at this fraction of the frame peak
  double octave_ratio = 0.8;   // shortest lag whose peak reaches this share of the best
};

struct EnergyConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
};

struct AcousticConfig {
  FormantConfig formant;
  PitchConfig pitch;
  EnergyConfig energy;
};

struct FormantFrame {
  double time = 0.0;
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  bool valid = false;
};

struct PitchFrame {
  double time = 0.0;
  double f0 = 0.0;  // 0 when unvoiced
  double voicing_strength = 0.0;
};

struct EnergyFrame {
  double time = 0.0;
  double energy_db = 0.0;
};

struct FormantCandidate {
  double frequency_hz = 0.0;
  double bandwidth_hz = 0.0;
};

struct LpcResult {
  std::vector<double> coefficients;  // a[1..order]: x[n] ~ sum_k a[k] x[n-k]
  double error = 0.0;
};

// r[tau] = sum_n x[n] x[n+tau], tau = 0..max_lag. Requires max_lag < frame size.
std::vector<double> autocorrelation(std::span<const double> frame, std::size_t max_lag);

// Levinson-Durbin recursion on the Yule-Walker equations.
// Throws DegenerateFrame when r[0] == 0.
LpcResult levinson_durbin(std::span<const double> r, int order);

// Roots of z^p - a1 z^(p-1) - ... - ap (Aberth-Ehrlich iteration).
// Throws NoConvergence after 200 iterations without convergence.
std::vector<std::complex<double>> lpc_roots(std::span<const double> a);

// Roots in the upper half plane mapped to (frequency, bandwidth), gated by
// frequency range and maximum bandwidth, sorted by frequency.
std::vector<FormantCandidate> roots_to_formants(std::span<const std::complex<double>> roots, double analysis_rate,
                                                const FormantConfig& config = {});

std::vector<FormantFrame> formant_track(const AudioSignal& s, const FormantConfig& config = {});
// Rectangular frames. The lag is picked on the center-clipped frame and
// refined on the raw one; both autocorrelations are divided by the overlap.
// voicing_strength is the clipped peak.
std::vector<PitchFrame> pitch_track(const AudioSignal& s, const PitchConfig& config = {});
std::vector<EnergyFrame> energy_track(const AudioSignal& s, const EnergyConfig& config = {});

// 10 log10((mean(x^2) + 1e-12) / (2e-5)^2).
double intensity_mean(const AudioSignal& s);

}  // namespace dialectid
