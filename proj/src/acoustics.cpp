#include "dialectid/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dialectid/errors.hpp"

namespace dialectid {

namespace {

constexpr int kAberthMaxIterations = 200;

struct PolyValue {
  std::complex<double> p;
  std::complex<double> dp;
};

// Horner evaluation of a monic polynomial given by descending coefficients.
PolyValue evaluate(std::span<const double> coeffs, std::complex<double> z) {
  std::complex<double> p = coeffs[0];
  std::complex<double> dp = 0.0;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    dp = dp * z + p;
    p = p * z + coeffs[k];
  }
  return {p, dp};
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> frame, std::size_t max_lag) {
  if (max_lag >= frame.size()) {
    throw OutOfRange("max_lag " + std::to_string(max_lag) + " must be below the frame length " +
                     std::to_string(frame.size()));
  }
  std::vector<double> r(max_lag + 1, 0.0);
  const std::size_t n = frame.size();
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += frame[i] * frame[i + lag];
    r[lag] = acc;
  }
  return r;
}

LpcResult levinson_durbin(std::span<const double> r, int order) {
  if (order < 1 || static_cast<std::size_t>(order) >= r.size()) {
    throw OutOfRange("LPC order must be in [1, " + std::to_string(r.size() - 1) + "]");
  }
  if (!(r[0] > 0.0)) throw DegenerateFrame("zero-energy frame (r[0] = 0)");

  LpcResult out;
  out.coefficients.assign(static_cast<std::size_t>(order), 0.0);
  std::vector<double>& a = out.coefficients;
  std::vector<double> previous(a.size(), 0.0);
  double error = r[0];
  for (int i = 1; i <= order; ++i) {
    if (error <= 0.0) break;  // perfectly predicted; higher orders add nothing
    double acc = r[static_cast<std::size_t>(i)];
    for (int j = 1; j < i; ++j) acc -= a[j - 1] * r[static_cast<std::size_t>(i - j)];
    const double k = acc / error;
    previous.assign(a.begin(), a.end());
    a[i - 1] = k;
    for (int j = 1; j < i; ++j) a[j - 1] = previous[j - 1] - k * previous[i - j - 1];
    error = std::max(0.0, error * (1.0 - k * k));
  }
  out.error = error;
  return out;
}

std::vector<std::complex<double>> lpc_roots(std::span<const double> a) {
  const std::size_t order = a.size();
  if (order == 0) throw OutOfRange("polynomial order must be at least 1");

  std::vector<double> coeffs(order + 1);
  coeffs[0] = 1.0;
  for (std::size_t k = 0; k < order; ++k) coeffs[k + 1] = -a[k];
  double max_coeff = 0.0;
  for (double c : coeffs) max_coeff = std::max(max_coeff, std::abs(c));

  const double last = std::abs(a[order - 1]);
  const double radius = last > 0.0 ? std::pow(last, 1.0 / static_cast<double>(order)) : 1.0;
  std::vector<std::complex<double>> z(order);
  for (std::size_t k = 0; k < order; ++k) {
    // The offset keeps initial guesses off the real axis and off symmetric points.
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(order) + 0.4;
    z[k] = std::polar(radius, angle);
  }

  bool converged = false;
  for (int iter = 0; iter < kAberthMaxIterations && !converged; ++iter) {
    converged = true;
    for (std::size_t k = 0; k < order; ++k) {
      const PolyValue v = evaluate(coeffs, z[k]);
      if (v.p == 0.0) continue;
      std::complex<double> repulsion = 0.0;
      for (std::size_t j = 0; j < order; ++j) {
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      }
      std::complex<double> step;
      if (v.dp == 0.0) {
        step = std::complex<double>(1e-8, 1e-8) * std::max(1.0, std::abs(z[k]));
      } else {
        const std::complex<double> ratio = v.p / v.dp;
        step = ratio / (1.0 - ratio * repulsion);
      }
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
        step = std::complex<double>(1e-8, 1e-8) * std::max(1.0, std::abs(z[k]));
      }
      z[k] -= step;
      if (std::abs(step) > 1e-14 * std::max(1.0, std::abs(z[k]))) converged = false;
    }
  }

  const double tolerance = 1e-8 * max_coeff;
  for (const auto& root : z) {
    if (!(std::abs(evaluate(coeffs, root).p) <= tolerance)) {
      throw NoConvergence("Aberth iteration did not converge within " + std::to_string(kAberthMaxIterations) +
                          " iterations");
    }
  }
  return z;
}

std::vector<FormantCandidate> roots_to_formants(std::span<const std::complex<double>> roots, double analysis_rate,
                                                const FormantConfig& config) {
  std::vector<FormantCandidate> out;
  for (const auto& root : roots) {
    if (!(root.imag() > 0.0)) continue;
    const double magnitude = std::abs(root);
    if (magnitude <= 0.0) continue;
    FormantCandidate c;
    c.frequency_hz = analysis_rate / (2.0 * std::numbers::pi) * std::arg(root);
    c.bandwidth_hz = -analysis_rate / std::numbers::pi * std::log(magnitude);
    if (c.frequency_hz < config.min_frequency_hz || c.frequency_hz > config.max_frequency_hz) continue;
    if (!(c.bandwidth_hz < config.max_bandwidth_hz)) continue;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const FormantCandidate& x, const FormantCandidate& y) {
    if (x.frequency_hz != y.frequency_hz) return x.frequency_hz < y.frequency_hz;
    return x.bandwidth_hz < y.bandwidth_hz;
  });
  return out;
}

std::vector<FormantFrame> formant_track(const AudioSignal& s, const FormantConfig& config) {
  if (s.samples.empty()) throw EmptySignal("formant_track on an empty signal");
  const AudioSignal conditioned = pre_emphasize(resample(s, config.analysis_rate), config.pre_emphasis_hz);
  const FrameSet frames = frame_signal(conditioned, config.frame_ms, config.hop_ms, Window::hamming);
  const auto order = static_cast<std::size_t>(config.lpc_order);

  std::vector<FormantFrame> track;
  track.reserve(frames.frames.size());
  for (std::size_t k = 0; k < frames.frames.size(); ++k) {
    FormantFrame f;
    f.time = frames.frame_centers[k];
    const auto& frame = frames.frames[k];
    if (frame.size() > order) {
      try {
        const auto r = autocorrelation(frame, order);
        const LpcResult lpc = levinson_durbin(r, config.lpc_order);
        const auto roots = lpc_roots(lpc.coefficients);
        const auto candidates = roots_to_formants(roots, config.analysis_rate, config);
        if (candidates.size() >= 3) {
          f.f1 = candidates[0].frequency_hz;
          f.f2 = candidates[1].frequency_hz;
          f.f3 = candidates[2].frequency_hz;
          f.b1 = candidates[0].bandwidth_hz;
          f.b2 = candidates[1].bandwidth_hz;
          f.b3 = candidates[2].bandwidth_hz;
          f.valid = f.f1 < f.f2 && f.f2 < f.f3;
        }
      } catch (const DegenerateFrame&) {
      } catch (const NoConvergence&) {
      }
    }
    track.push_back(f);
  }
  return track;
}

namespace {

// Zero inside +-level*max|x|, shift the rest toward zero.
std::vector<double> center_clip(std::span<const double> x, double level) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double t = level * peak;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > t) out[i] = x[i] - t;
    else if (x[i] < -t) out[i] = x[i] + t;
  }
  return out;
}

}  // namespace

std::vector<PitchFrame> pitch_track(const AudioSignal& s, const PitchConfig& config) {
  if (s.samples.empty()) throw EmptySignal("pitch_track on an empty signal");
  const FrameSet frames = frame_signal(s, config.frame_ms, config.hop_ms, Window::rectangular);
  const double rate = s.sample_rate;
  const std::size_t length = frames.frame_length;
  const auto lag_min = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(rate / config.max_f0_hz)));
  const auto lag_max =
      std::min<std::size_t>(length - 2, static_cast<std::size_t>(std::ceil(rate / config.min_f0_hz)));

  struct Analysis {
    double rms = 0.0;
    double f0 = 0.0;
    double strength = 0.0;
  };
  std::vector<Analysis> analyses(frames.frames.size());
  double max_rms = 0.0;
  for (std::size_t k = 0; k < frames.frames.size(); ++k) {
    const auto& frame = frames.frames[k];
    Analysis& out = analyses[k];
    if (lag_min >= lag_max) continue;
    const auto r = autocorrelation(frame, lag_max + 1);
    out.rms = std::sqrt(r[0] / static_cast<double>(length));
    max_rms = std::max(max_rms, out.rms);
    if (!(r[0] > 0.0)) continue;

    // Lag products are divided by the overlap, so a periodic frame peaks
    // near 1 at its period instead of being pulled toward shorter lags.
    const auto unbiased = [length](const std::vector<double>& a, std::size_t lag) {
      return a[lag] * static_cast<double>(length) / static_cast<double>(length - lag);
    };

    // Center clipping removes most of the formant ringing, so a periodicity
    // peak survives for pulse trains but not for resonant noise.
    const auto clipped = center_clip(frame, config.clip_level);
    const auto c = autocorrelation(clipped, lag_max + 1);
    if (!(c[0] > 0.0)) continue;

    // Multiples of the period score about as high as the period itself, so
    // take the shortest peak that comes close to the best one.
    std::vector<std::pair<std::size_t, double>> peaks;
    double top = -1.0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      const double here = unbiased(c, lag);
      if (here >= unbiased(c, lag - 1) && here > unbiased(c, lag + 1)) {
        peaks.emplace_back(lag, here / c[0]);
        top = std::max(top, here / c[0]);
      }
    }
    std::size_t coarse = 0;
    double best_rho = -1.0;
    for (const auto& [lag, rho] : peaks) {
      if (rho >= config.octave_ratio * top) {
        coarse = lag;
        best_rho = rho;
        break;
      }
    }
    if (coarse == 0) continue;

    // Refine on the raw autocorrelation near the clipped peak.
    std::size_t best = coarse;
    for (std::size_t lag = std::max(lag_min, coarse - std::min<std::size_t>(coarse, 2));
         lag <= std::min(lag_max, coarse + 2); ++lag)
      if (unbiased(r, lag) > unbiased(r, best)) best = lag;
    if (best <= lag_min - 1 || best >= lag_max + 1) continue;

    const double mid = unbiased(r, best) / r[0];
    const double left = unbiased(r, best - 1) / r[0];
    const double right = unbiased(r, best + 1) / r[0];
    const double curvature = left - 2.0 * mid + right;
    double shift = 0.0;
    if (curvature < 0.0) shift = std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
    const double peak = best_rho;
    out.f0 = rate / (static_cast<double>(best) + shift);
    out.strength = std::clamp(peak, 0.0, 1.0);
  }

  std::vector<PitchFrame> track(frames.frames.size());
  for (std::size_t k = 0; k < track.size(); ++k) {
    const Analysis& a = analyses[k];
    PitchFrame& p = track[k];
    p.time = frames.frame_centers[k];
    p.voicing_strength = a.strength;
    const bool loud = max_rms > 0.0 && a.rms >= config.silence_gate * max_rms;
    const bool periodic = a.strength >= config.voicing_threshold;
    const bool in_range = a.f0 >= config.min_f0_hz && a.f0 <= config.max_f0_hz;
    p.f0 = loud && periodic && in_range ? a.f0 : 0.0;
  }
  return track;
}

std::vector<EnergyFrame> energy_track(const AudioSignal& s, const EnergyConfig& config) {
  if (s.samples.empty()) throw EmptySignal("energy_track on an empty signal");
  const FrameSet frames = frame_signal(s, config.frame_ms, config.hop_ms, Window::rectangular);
  // A zero-padded single frame averages over the real samples only.
  const double count = static_cast<double>(std::min(frames.frame_length, s.samples.size()));
  std::vector<EnergyFrame> track(frames.frames.size());
  for (std::size_t k = 0; k < track.size(); ++k) {
    double sum = 0.0;
    for (double x : frames.frames[k]) sum += x * x;
    track[k].time = frames.frame_centers[k];
    track[k].energy_db = 10.0 * std::log10(sum / count + kLogFloor);
  }
  return track;
}

double intensity_mean(const AudioSignal& s) {
  if (s.samples.empty()) throw EmptySignal("intensity_mean on an empty signal");
  double sum = 0.0;
  for (double x : s.samples) sum += x * x;
  const double mean_square = sum / static_cast<double>(s.samples.size());
  return 10.0 * std::log10((mean_square + kLogFloor) / (kIntensityReference * kIntensityReference));
}

}  // namespace dialectid
