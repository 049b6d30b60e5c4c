#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "dialectid/audio.hpp"
#include "dialectid/errors.hpp"
#include "support.hpp"

using namespace dialectid;

namespace {

void put_u32(std::vector<std::byte>& b, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<std::byte>((v >> (8 * k)) & 0xFF));
}
void put_u16(std::vector<std::byte>& b, std::uint16_t v) {
  b.push_back(static_cast<std::byte>(v & 0xFF));
  b.push_back(static_cast<std::byte>(v >> 8));
}
void put_tag(std::vector<std::byte>& b, const char* tag) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<std::byte>(tag[k]));
}

// Hand-built RIFF/WAVE; `frames` holds interleaved 16-bit samples.
std::vector<std::byte> wav_bytes(const std::vector<std::int16_t>& frames, int channels, int rate,
                                 std::uint16_t format = 1, std::uint16_t bits = 16) {
  std::vector<std::byte> b;
  const auto data_size = static_cast<std::uint32_t>(frames.size() * 2);
  put_tag(b, "RIFF");
  put_u32(b, 36 + data_size);
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, format);
  put_u16(b, static_cast<std::uint16_t>(channels));
  put_u32(b, static_cast<std::uint32_t>(rate));
  put_u32(b, static_cast<std::uint32_t>(rate * channels * bits / 8));
  put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(b, bits);
  put_tag(b, "data");
  put_u32(b, data_size);
  for (auto s : frames) put_u16(b, static_cast<std::uint16_t>(s));
  return b;
}

// Frequency from interpolated upward zero crossings, skipping the edges.
double zero_crossing_frequency(const AudioSignal& s) {
  const std::size_t skip = s.samples.size() / 10;
  double first = -1.0, last = -1.0;
  int crossings = 0;
  for (std::size_t i = skip; i + 1 < s.samples.size() - skip; ++i) {
    const double a = s.samples[i], b = s.samples[i + 1];
    if (a < 0.0 && b >= 0.0) {
      const double t = (static_cast<double>(i) + a / (a - b)) / s.sample_rate;
      if (first < 0.0) first = t;
      last = t;
      ++crossings;
    }
  }
  return (crossings - 1) / (last - first);
}

}  // namespace

TEST_SUITE("audio") {
  TEST_CASE("mono zeros") {
    const auto s = read_wav(wav_bytes(std::vector<std::int16_t>(100, 0), 1, 16000));
    CHECK(s.sample_rate == 16000);
    REQUIRE(s.samples.size() == 100);
    for (double x : s.samples) CHECK(x == 0.0);
  }

  TEST_CASE("stereo channels are averaged") {
    std::vector<std::int16_t> frames;
    for (int i = 0; i < 50; ++i) frames.insert(frames.end(), {16384, -16384});
    const auto s = read_wav(wav_bytes(frames, 2, 22050));
    REQUIRE(s.samples.size() == 50);
    for (double x : s.samples) CHECK(x == 0.0);
  }

  TEST_CASE("full-scale negative maps to -1 exactly") {
    const auto s = read_wav(wav_bytes({-32768, 32767, 1}, 1, 8000));
    CHECK(s.samples[0] == -1.0);
    CHECK(s.samples[1] == 32767.0 / 32768.0);
    CHECK(s.samples[2] == 1.0 / 32768.0);
  }

  TEST_CASE("format errors") {
    CHECK_THROWS_AS(read_wav(wav_bytes({0, 0}, 1, 16000, 3)), UnsupportedFormat);
    CHECK_THROWS_AS(read_wav(wav_bytes({0, 0}, 1, 16000, 1, 24)), UnsupportedFormat);
    CHECK_THROWS_AS(read_wav(wav_bytes({0, 0}, 1, 4000)), UnsupportedFormat);
    auto truncated = wav_bytes(std::vector<std::int16_t>(10, 0), 1, 16000);
    truncated.resize(30);
    CHECK_THROWS_AS(read_wav(truncated), CorruptContainer);
    auto not_riff = wav_bytes({0}, 1, 16000);
    not_riff[0] = std::byte{'X'};
    CHECK_THROWS_AS(read_wav(not_riff), CorruptContainer);
    CHECK_THROWS_AS(read_wav(std::span<const std::byte>()), CorruptContainer);
  }

  TEST_CASE("write then read reproduces 16-bit quantized samples") {
    auto s = testing::white_noise(0.05, 16000, 5, 0.3);
    s.samples.push_back(-1.0);
    s.samples.push_back(1.5);  // clipped on write
    const auto back = read_wav(write_wav(s));
    REQUIRE(back.samples.size() == s.samples.size());
    CHECK(back.sample_rate == 16000);
    for (std::size_t i = 0; i + 1 < s.samples.size(); ++i) CHECK(std::abs(back.samples[i] - s.samples[i]) <= 0.5 / 32768.0 + 1e-15);
    CHECK(back.samples.back() == 32767.0 / 32768.0);
    CHECK(write_wav(back) == write_wav(s));
  }

  TEST_CASE("validate") {
    AudioSignal s;
    s.samples = {0.0};
    s.sample_rate = 7999;
    CHECK_THROWS_AS(validate(s), OutOfRange);
    s.sample_rate = 48000;
    CHECK_NOTHROW(validate(s));
    s.samples[0] = NAN;
    CHECK_THROWS_AS(validate(s), OutOfRange);
  }

  TEST_CASE("slice") {
    const auto s = testing::tone(50.0, 1.0, 10000);
    CHECK(slice(s, 0.0, s.duration()).samples == s.samples);
    const auto mid = slice(s, 0.25, 0.75);
    CHECK(mid.samples.size() == 5000);
    CHECK(mid.samples.front() == s.samples[2500]);
    CHECK_THROWS_AS(slice(s, 0.5, 0.5), OutOfRange);
    CHECK_THROWS_AS(slice(s, -0.1, 0.5), OutOfRange);
    CHECK_THROWS_AS(slice(s, 0.5, 1.2), OutOfRange);
  }

  TEST_CASE("slice of a slice") {
    const auto s = testing::white_noise(1.0, 16000, 8);
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
      const double a = rng.uniform() * 0.5, b = a + 0.01 + rng.uniform() * 0.2, c = b + 0.01 + rng.uniform() * 0.2;
      const auto nested = slice(slice(s, a, c), 0.0, b - a);
      const auto direct = slice(s, a, b);
      CHECK(std::abs(static_cast<long>(nested.samples.size()) - static_cast<long>(direct.samples.size())) <= 1);
      const std::size_t n = std::min(nested.samples.size(), direct.samples.size());
      CHECK(std::equal(nested.samples.begin(), nested.samples.begin() + n, direct.samples.begin()));
    }
  }

  TEST_CASE("resample to the same rate is the identity") {
    const auto s = testing::white_noise(0.1, 16000, 2);
    CHECK(resample(s, 16000).samples == s.samples);
    CHECK_THROWS_AS(resample(s, 50000), OutOfRange);
  }

  TEST_CASE("resampled length") {
    for (int from : {8000, 11025, 16000, 22050, 44100, 48000})
      for (int to : {8000, 10000, 16000, 44100}) {
        const auto s = testing::white_noise(0.37, from, 1);
        const auto r = resample(s, to);
        CHECK(r.sample_rate == to);
        const double expected = static_cast<double>(s.samples.size()) * to / from;
        CHECK(std::abs(static_cast<double>(r.samples.size()) - expected) <= 1.0);
      }
  }

  TEST_CASE("440 Hz at 44.1 kHz keeps its spectral peak at 10 kHz") {
    const auto r = resample(testing::tone(440.0, 2.0, 44100), 10000);
    const auto psd = testing::welch_psd(r.samples, 10000);  // 1 Hz bins
    const auto peak = std::max_element(psd.begin() + 1, psd.end()) - psd.begin();
    CHECK(std::abs(static_cast<double>(peak) - 440.0) <= 2.0);
  }

  TEST_CASE("tones below 0.4 of the target rate keep their frequency") {
    for (int from : {16000, 22050, 44100, 48000})
      for (double f : {100.0, 440.0, 1000.0, 2500.0, 3900.0}) {
        const auto r = resample(testing::tone(f, 1.0, from), 10000);
        CAPTURE(from);
        CAPTURE(f);
        CHECK(std::abs(zero_crossing_frequency(r) - f) <= 0.005 * f);
      }
  }

  TEST_CASE("white noise 48 kHz to 10 kHz: stopband 40 dB below passband") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto r = resample(testing::white_noise(4.0, 48000, seed, 0.25), 10000);
      const auto psd = testing::welch_psd(r.samples, 1000);  // 10 Hz bins
      double pass = 0.0, stop = 0.0;
      int np = 0, ns = 0;
      for (std::size_t k = 0; k < psd.size(); ++k) {
        const double hz = 10.0 * k;
        if (hz >= 100.0 && hz <= 4000.0) pass += psd[k], ++np;
        if (hz > 4500.0) stop += psd[k], ++ns;
      }
      const double ratio_db = 10.0 * std::log10((stop / ns) / (pass / np));
      CAPTURE(ratio_db);
      CHECK(ratio_db <= -40.0);
    }
  }

  TEST_CASE("pre-emphasis") {
    CHECK(pre_emphasis_coefficient(50.0, 10000) == doctest::Approx(0.96906).epsilon(1e-5));
    CHECK(pre_emphasis_coefficient(50.0, 10000) == std::exp(-std::numbers::pi / 100.0));
    AudioSignal c;
    c.sample_rate = 10000;
    c.samples.assign(100, 0.3);
    const double a = pre_emphasis_coefficient(50.0, 10000);
    const auto y = pre_emphasize(c, 50.0);
    CHECK(y.samples[0] == 0.3);
    for (std::size_t i = 1; i < y.samples.size(); ++i) CHECK(y.samples[i] == doctest::Approx(0.3 * (1.0 - a)).epsilon(1e-12));
    const auto n = testing::white_noise(0.01, 16000, 3);
    const auto yn = pre_emphasize(n, 80.0);
    const double an = pre_emphasis_coefficient(80.0, 16000);
    for (std::size_t i = 1; i < n.samples.size(); ++i)
      CHECK(yn.samples[i] == doctest::Approx(n.samples[i] - an * n.samples[i - 1]).epsilon(1e-12));
    CHECK_THROWS_AS(pre_emphasize(c, 0.0), OutOfRange);
  }

  TEST_CASE("Hamming window") {
    for (std::size_t n : {2u, 3u, 25u, 250u, 401u}) {
      const auto w = hamming_window(n);
      REQUIRE(w.size() == n);
      CHECK(w.front() == 0.08);
      CHECK(w.back() == 0.08);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(w[i] == doctest::Approx(0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1))).epsilon(1e-14));
        CHECK(w[i] == w[n - 1 - i]);
      }
    }
    CHECK(hamming_window(1) == std::vector<double>{1.0});
  }

  TEST_CASE("framing 1 s at 10 kHz, 25/10 ms") {
    const auto s = testing::white_noise(1.0, 10000, 6);
    const auto f = frame_signal(s, 25.0, 10.0, Window::rectangular);
    CHECK(f.frames.size() == 98);
    CHECK(f.frame_length == 250);
    CHECK(f.hop == 100);
    for (std::size_t k = 0; k < f.frames.size(); ++k) {
      REQUIRE(f.frames[k].size() == 250);
      CHECK(std::equal(f.frames[k].begin(), f.frames[k].end(), s.samples.begin() + k * 100));
      CHECK(f.frame_centers[k] == doctest::Approx(0.0125 + 0.010 * k).epsilon(1e-12));
      if (k > 0) CHECK(f.frame_centers[k] > f.frame_centers[k - 1]);
    }
    const auto h = frame_signal(s, 25.0, 10.0, Window::hamming);
    const auto w = hamming_window(250);
    for (std::size_t i = 0; i < 250; ++i) CHECK(h.frames[3][i] == s.samples[300 + i] * w[i]);
  }

  TEST_CASE("short signal gives one zero-padded centred frame") {
    AudioSignal s;
    s.sample_rate = 10000;
    s.samples.assign(80, 0.25);
    const auto f = frame_signal(s, 25.0, 10.0, Window::rectangular);
    REQUIRE(f.frames.size() == 1);
    REQUIRE(f.frames[0].size() == 250);
    const auto nonzero = std::count_if(f.frames[0].begin(), f.frames[0].end(), [](double x) { return x != 0.0; });
    CHECK(nonzero == 80);
    const auto first = std::find(f.frames[0].begin(), f.frames[0].end(), 0.25) - f.frames[0].begin();
    CHECK(std::abs(first - 85) <= 1);
    s.samples.clear();
    CHECK_THROWS_AS(frame_signal(s, 25.0, 10.0, Window::rectangular), EmptySignal);
  }
}
