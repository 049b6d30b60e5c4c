#include "dialectid/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "dialectid/errors.hpp"

namespace dialectid {

namespace {

std::uint32_t read_u32(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned>(b[at]) | (static_cast<unsigned>(b[at + 1]) << 8));
}

bool tag_is(std::span<const std::byte> b, std::size_t at, const char (&tag)[5]) {
  for (int k = 0; k < 4; ++k) {
    if (static_cast<char>(b[at + k]) != tag[k]) return false;
  }
  return true;
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::byte>((v >> (8 * k)) & 0xFF));
}

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFF));
  out.push_back(static_cast<std::byte>(v >> 8));
}

void put_tag(std::vector<std::byte>& out, const char (&tag)[5]) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::byte>(tag[k]));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
// Kernel span in target-rate samples; the tap count at the source rate
// grows with the rate ratio so the transition width stays fixed.
constexpr int kResampleSpan = 101;
constexpr double kResampleStopband = 0.45;  // fraction of the target rate

}  // namespace

void validate(const AudioSignal& s) {
  if (s.sample_rate < kMinSampleRate || s.sample_rate > kMaxSampleRate) {
    throw OutOfRange("sample rate " + std::to_string(s.sample_rate) + " Hz outside [8000, 48000]");
  }
  for (double x : s.samples) {
    if (!std::isfinite(x)) throw OutOfRange("non-finite sample");
  }
}

AudioSignal read_wav(std::span<const std::byte> raw) {
  if (raw.size() < 12 || !tag_is(raw, 0, "RIFF") || !tag_is(raw, 8, "WAVE")) {
    throw CorruptContainer("missing RIFF/WAVE header");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
  std::span<const std::byte> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const std::uint32_t chunk_size = read_u32(raw, pos + 4);
    const std::size_t body = pos + 8;
    if (chunk_size > raw.size() - body) {
      // Tolerate a data chunk whose declared size runs past EOF (truncated
      // recordings); any other overrun is corruption.
      if (!tag_is(raw, pos, "data")) throw CorruptContainer("chunk extends past end of file");
    }
    const std::size_t available = std::min<std::size_t>(chunk_size, raw.size() - body);
    if (tag_is(raw, pos, "fmt ")) {
      if (available < 16) throw CorruptContainer("fmt chunk too short");
      std::uint16_t format = read_u16(raw, body);
      channels = read_u16(raw, body + 2);
      rate = read_u32(raw, body + 4);
      block_align = read_u16(raw, body + 12);
      bits = read_u16(raw, body + 14);
      if (format == kFormatExtensible) {
        if (available < 26) throw CorruptContainer("extensible fmt chunk too short");
        format = read_u16(raw, body + 24);  // first two bytes of the sub-format GUID
      }
      if (format != kFormatPcm) throw UnsupportedFormat("only PCM WAV is supported (format tag " + std::to_string(format) + ")");
      have_fmt = true;
    } else if (tag_is(raw, pos, "data")) {
      data = raw.subspan(body, available);
      have_data = true;
    }
    pos = body + available + (available % 2);
  }
  if (!have_fmt) throw CorruptContainer("missing fmt chunk");
  if (!have_data) throw CorruptContainer("missing data chunk");
  if (bits != 16) throw UnsupportedFormat("bit depth " + std::to_string(bits) + " (only 16-bit PCM is supported)");
  if (channels != 1 && channels != 2) {
    throw UnsupportedFormat(std::to_string(channels) + " channels (mono or stereo only)");
  }
  if (block_align != channels * 2) throw CorruptContainer("block alignment disagrees with channel count");
  if (rate < static_cast<std::uint32_t>(kMinSampleRate) || rate > static_cast<std::uint32_t>(kMaxSampleRate)) {
    throw UnsupportedFormat("sample rate " + std::to_string(rate) + " Hz outside [8000, 48000]");
  }

  AudioSignal s;
  s.sample_rate = static_cast<int>(rate);
  const std::size_t n_frames = data.size() / block_align;
  s.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto v = static_cast<std::int16_t>(read_u16(data, i * block_align + 2 * c));
      acc += static_cast<double>(v) / 32768.0;
    }
    s.samples[i] = acc / channels;
  }
  return s;
}

std::vector<std::byte> write_wav(const AudioSignal& s) {
  const auto n = static_cast<std::uint32_t>(s.samples.size());
  std::vector<std::byte> out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * n);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(s.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(s.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * n);
  for (double x : s.samples) {
    const double scaled = std::clamp(std::nearbyint(x * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

AudioSignal slice(const AudioSignal& s, double t0, double t1) {
  const double half_sample = 0.5 / s.sample_rate;
  if (!(t0 >= 0.0) || !(t0 < t1) || !(t1 <= s.duration() + half_sample)) {
    throw OutOfRange("slice [" + std::to_string(t0) + ", " + std::to_string(t1) + ") outside signal of " +
                     std::to_string(s.duration()) + " s");
  }
  const auto i0 = static_cast<std::size_t>(std::llround(t0 * s.sample_rate));
  const auto i1 = std::min(static_cast<std::size_t>(std::llround(t1 * s.sample_rate)), s.samples.size());
  if (i0 >= i1) throw OutOfRange("slice shorter than one sample");
  AudioSignal out;
  out.sample_rate = s.sample_rate;
  out.samples.assign(s.samples.begin() + static_cast<std::ptrdiff_t>(i0),
                     s.samples.begin() + static_cast<std::ptrdiff_t>(i1));
  return out;
}

AudioSignal resample(const AudioSignal& s, int target_rate) {
  if (target_rate < kMinSampleRate || target_rate > kMaxSampleRate) {
    throw OutOfRange("target rate " + std::to_string(target_rate) + " Hz outside [8000, 48000]");
  }
  if (target_rate == s.sample_rate) return s;

  std::vector<double> source = s.samples;
  if (target_rate < s.sample_rate) {
    // Low-pass at the source rate with the stopband starting at 0.45 * target.
    // A Hamming window reaches its stopband about 1.65 / span target-rate
    // cycles past the -6 dB point, so the cutoff sits that far below.
    const double ratio = static_cast<double>(s.sample_rate) / target_rate;
    const int mid = static_cast<int>(std::ceil(0.5 * (kResampleSpan - 1) * ratio));
    const int length = 2 * mid + 1;
    const double fc = (kResampleStopband - 1.65 / kResampleSpan) / ratio;  // cycles per source sample
    const std::vector<double> window = hamming_window(static_cast<std::size_t>(length));
    std::vector<double> taps(static_cast<std::size_t>(length));
    double sum = 0.0;
    for (int k = 0; k < length; ++k) {
      const double x = k - mid;
      const double sinc = x == 0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * x) / (std::numbers::pi * x);
      taps[k] = sinc * window[k];
      sum += taps[k];
    }
    for (double& t : taps) t /= sum;

    const auto n = static_cast<std::ptrdiff_t>(s.samples.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - mid);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + mid);
      for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += taps[static_cast<std::size_t>(j - i + mid)] * s.samples[j];
      source[static_cast<std::size_t>(i)] = acc;
    }
  }

  AudioSignal out;
  out.sample_rate = target_rate;
  const auto n_in = static_cast<long long>(source.size());
  const long long n_out = (n_in * target_rate + s.sample_rate / 2) / s.sample_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  const double step = static_cast<double>(s.sample_rate) / target_rate;
  for (long long m = 0; m < n_out; ++m) {
    const double pos = m * step;
    const auto i = static_cast<long long>(std::floor(pos));
    const double frac = pos - i;
    const double a = i < n_in ? source[static_cast<std::size_t>(i)] : 0.0;
    const double b = i + 1 < n_in ? source[static_cast<std::size_t>(i + 1)] : a;
    out.samples[static_cast<std::size_t>(m)] = a + frac * (b - a);
  }
  return out;
}

double pre_emphasis_coefficient(double cutoff_hz, int sample_rate) {
  return std::exp(-2.0 * std::numbers::pi * cutoff_hz / sample_rate);
}

AudioSignal pre_emphasize(const AudioSignal& s, double cutoff_hz) {
  if (!(cutoff_hz > 0.0)) throw OutOfRange("pre-emphasis cutoff must be positive");
  const double alpha = pre_emphasis_coefficient(cutoff_hz, s.sample_rate);
  AudioSignal out;
  out.sample_rate = s.sample_rate;
  out.samples.resize(s.samples.size());
  for (std::size_t n = 0; n < s.samples.size(); ++n) {
    out.samples[n] = n == 0 ? s.samples[0] : s.samples[n] - alpha * s.samples[n - 1];
  }
  return out;
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  // Compute the first half and mirror it so the window is exactly symmetric.
  for (std::size_t k = 0; k <= (n - 1) / 2; ++k) {
    w[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
    w[n - 1 - k] = w[k];
  }
  // cos() is inexact at 2*pi; pin the documented endpoint values.
  w.front() = 0.08;
  w.back() = 0.08;
  return w;
}

FrameSet frame_signal(const AudioSignal& s, double frame_ms, double hop_ms, Window window) {
  if (s.samples.empty()) throw EmptySignal("cannot frame an empty signal");
  if (!(frame_ms >= 5.0) || !(hop_ms >= 1.0)) throw OutOfRange("frame >= 5 ms and hop >= 1 ms required");
  FrameSet fs;
  fs.frame_length = static_cast<std::size_t>(std::llround(frame_ms * s.sample_rate / 1000.0));
  fs.hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(hop_ms * s.sample_rate / 1000.0)));
  const std::size_t n = s.samples.size();
  const std::vector<double> weights =
      window == Window::hamming ? hamming_window(fs.frame_length) : std::vector<double>(fs.frame_length, 1.0);
  const double rate = s.sample_rate;

  if (n < fs.frame_length) {
    std::vector<double> frame(fs.frame_length, 0.0);
    const std::size_t offset = (fs.frame_length - n) / 2;
    for (std::size_t i = 0; i < n; ++i) frame[offset + i] = s.samples[i] * weights[offset + i];
    fs.frames.push_back(std::move(frame));
    fs.frame_centers.push_back(static_cast<double>(n) / 2.0 / rate);
    return fs;
  }

  const std::size_t count = (n - fs.frame_length) / fs.hop + 1;
  fs.frames.reserve(count);
  fs.frame_centers.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * fs.hop;
    std::vector<double> frame(fs.frame_length);
    for (std::size_t i = 0; i < fs.frame_length; ++i) frame[i] = s.samples[start + i] * weights[i];
    fs.frames.push_back(std::move(frame));
    fs.frame_centers.push_back((static_cast<double>(start) + fs.frame_length / 2.0) / rate);
  }
  return fs;
}

}  // namespace dialectid
