#pragma once

// WAV ingestion and the signal-conditioning primitives shared by every
// acoustic analysis.

#include <cstddef>
#include <span>
#include <vector>

namespace dialectid {

inline constexpr int kMinSampleRate = 8000;
inline constexpr int kMaxSampleRate = 48000;

struct AudioSignal {
  std::vector<double> samples;  // amplitudes in [-1, 1]
  int sample_rate = 16000;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Throws OutOfRange for a rate outside [8000, 48000] or non-finite samples.
void validate(const AudioSignal& s);

// PCM-16 RIFF/WAVE, mono or stereo (channels averaged). Samples are scaled by
// 1/32768 so -32768 maps to -1.0 exactly.
// Throws UnsupportedFormat or CorruptContainer.
AudioSignal read_wav(std::span<const std::byte> raw);

// PCM-16 mono; samples are scaled by 32768, rounded and clipped.
std::vector<std::byte> write_wav(const AudioSignal& s);

// Samples [round(t0*rate), round(t1*rate)). Throws OutOfRange unless
// 0 <= t0 < t1 <= duration (t1 may overshoot by half a sample).
AudioSignal slice(const AudioSignal& s, double t0, double t1);

// When downsampling: Hamming-windowed sinc low-pass spanning 101 target-rate
// samples, stopband from 0.45 * target rate (-6 dB near 0.434 * target).
// Then linear interpolation onto the target grid.
AudioSignal resample(const AudioSignal& s, int target_rate);

// y[n] = x[n] - a*x[n-1], a = exp(-2*pi*cutoff/rate), y[0] = x[0].
AudioSignal pre_emphasize(const AudioSignal& s, double cutoff_hz);

double pre_emphasis_coefficient(double cutoff_hz, int sample_rate);

enum class Window { hamming, rectangular };

// w[n] = 0.54 - 0.46 cos(2 pi n / (N - 1)); a single-sample window is 1.
std::vector<double> hamming_window(std::size_t n);

struct FrameSet {
  std::vector<std::vector<double>> frames;
  std::size_t frame_length = 0;  // samples
  std::size_t hop = 0;           // samples
  std::vector<double> frame_centers;  // seconds
};

// Frame k covers samples [k*hop, k*hop + L) and is centred at
// (k*hop + L/2)/rate. A signal shorter than one frame yields a single
// zero-padded frame with the signal in its middle.
// Throws EmptySignal.
FrameSet frame_signal(const AudioSignal& s, double frame_ms, double hop_ms, Window window);

}  // namespace dialectid
