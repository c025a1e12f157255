#include "min2net/preproc/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "min2net/errors.hpp"

namespace min2net::preproc {

using cplx = std::complex<double>;

void FilterSpec::validate() const {
  if (order < 1) throw ConfigError("filter order must be >= 1");
  if (!(fs > 0.0)) throw ConfigError("filter design rate must be positive");
  if (!(low_hz > 0.0 && low_hz < high_hz)) throw ConfigError("band edges must satisfy 0 < low < high");
  if (!(high_hz < fs / 2.0)) {
    throw ConfigError("band edge " + std::to_string(high_hz) + " Hz is not below Nyquist (" + std::to_string(fs / 2.0) +
                      " Hz)");
  }
}

ZeroPoleGain butter_bandpass_zpk(const FilterSpec& spec) {
  spec.validate();
  const int n = spec.order;
  const double pi = std::numbers::pi;

  // Analog prototype on the unit circle, left half plane.
  std::vector<cplx> proto;
  for (int m = -n + 1; m < n; m += 2) proto.push_back(-std::exp(cplx(0.0, pi * m / (2.0 * n))));

  // Pre-warp the edges for a bilinear map with sample rate 2 (Nyquist = 1).
  const double fs2 = 4.0;
  const double w1 = fs2 * std::tan(pi * (spec.low_hz / (spec.fs / 2.0)) / 2.0);
  const double w2 = fs2 * std::tan(pi * (spec.high_hz / (spec.fs / 2.0)) / 2.0);
  const double bw = w2 - w1;
  const double wo = std::sqrt(w1 * w2);

  // Low-pass to band-pass.
  std::vector<cplx> analog;
  for (const cplx& p : proto) {
    const cplx lp = p * (bw / 2.0);
    const cplx root = std::sqrt(lp * lp - wo * wo);
    analog.push_back(lp + root);
    analog.push_back(lp - root);
  }
  const double k_analog = std::pow(bw, n);

  // Bilinear transform: n analog zeros at s = 0 map to z = 1; the remaining
  // degree lands at z = -1.
  ZeroPoleGain out;
  cplx denom = 1.0;
  for (const cplx& p : analog) {
    out.poles.push_back((fs2 + p) / (fs2 - p));
    denom *= fs2 - p;
  }
  out.zeros.assign(static_cast<std::size_t>(n), cplx(1.0, 0.0));
  out.zeros.insert(out.zeros.end(), static_cast<std::size_t>(n), cplx(-1.0, 0.0));
  out.gain = k_analog * (std::pow(fs2, n) / denom).real();
  return out;
}

BiquadCascade butter_bandpass(const FilterSpec& spec) {
  const ZeroPoleGain zpk = butter_bandpass_zpk(spec);

  // Group poles into conjugate pairs; leftover real poles pair up in sorted order.
  std::vector<std::pair<cplx, cplx>> pairs;
  std::vector<double> reals;
  for (const cplx& p : zpk.poles) {
    const double tol = 1e-12 * std::max(1.0, std::abs(p));
    if (std::abs(p.imag()) <= tol) {
      reals.push_back(p.real());
    } else if (p.imag() > 0) {
      pairs.emplace_back(p, std::conj(p));
    }
  }
  std::sort(reals.begin(), reals.end());
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) pairs.emplace_back(cplx(reals[i]), cplx(reals[i + 1]));
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return std::max(std::abs(a.first), std::abs(a.second)) < std::max(std::abs(b.first), std::abs(b.second));
  });

  BiquadCascade out;
  for (const auto& [p, q] : pairs) {
    Biquad s;
    // One zero at +1 and one at -1 per section: 1 - z^-2.
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(p + q).real();
    s.a2 = (p * q).real();
    out.sections.push_back(s);
  }
  out.sections.front().b0 *= zpk.gain;
  out.sections.front().b2 *= zpk.gain;
  return out;
}

std::vector<cplx> BiquadCascade::poles() const {
  std::vector<cplx> out;
  for (const auto& s : sections) {
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    out.push_back((-s.a1 + disc) / 2.0);
    out.push_back((-s.a1 - disc) / 2.0);
  }
  return out;
}

bool BiquadCascade::stable() const {
  const auto ps = poles();
  return std::all_of(ps.begin(), ps.end(), [](const cplx& p) { return std::abs(p) < 1.0; });
}

cplx BiquadCascade::response(double freq_hz, double fs) const {
  const cplx zinv = std::exp(cplx(0.0, -2.0 * std::numbers::pi * freq_hz / fs));
  cplx h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b0 + zinv * (s.b1 + zinv * s.b2)) / (1.0 + zinv * (s.a1 + zinv * s.a2));
  }
  return h;
}

double BiquadCascade::magnitude_db(double freq_hz, double fs) const {
  return 20.0 * std::log10(std::abs(response(freq_hz, fs)));
}

namespace {

std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> BiquadCascade::to_ba() const {
  std::vector<double> b{1.0}, a{1.0};
  for (const auto& s : sections) {
    b = polymul(b, {s.b0, s.b1, s.b2});
    a = polymul(a, {1.0, s.a1, s.a2});
  }
  return {b, a};
}

std::vector<double> sosfilt(const BiquadCascade& filter, std::span<const double> x,
                            std::vector<std::array<double, 2>>* zi) {
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t k = 0; k < filter.sections.size(); ++k) {
    const Biquad& s = filter.sections[k];
    double z1 = zi ? (*zi)[k][0] : 0.0;
    double z2 = zi ? (*zi)[k][1] : 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    if (zi) (*zi)[k] = {z1, z2};
  }
  return y;
}

std::vector<std::array<double, 2>> sosfilt_zi(const BiquadCascade& filter) {
  std::vector<std::array<double, 2>> zi;
  double scale = 1.0;
  for (const auto& s : filter.sections) {
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double z2 = s.b2 - s.a2 * dc;
    const double z1 = s.b1 - s.a1 * dc + z2;
    zi.push_back({scale * z1, scale * z2});
    scale *= dc;
  }
  return zi;
}

std::size_t filtfilt_padlen(const BiquadCascade& filter) { return 3 * 2 * filter.sections.size(); }

namespace {

// One forward pass over the padded signal, then one backward pass.
std::vector<double> forward_backward(const BiquadCascade& filter, std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = sosfilt_zi(filter);
  auto scaled = [&](double v) {
    auto z = zi;
    for (auto& s : z) {
      s[0] *= v;
      s[1] *= v;
    }
    return z;
  };

  auto state = scaled(ext.front());
  std::vector<double> fwd = sosfilt(filter, ext, &state);
  std::reverse(fwd.begin(), fwd.end());
  state = scaled(fwd.front());
  std::vector<double> bwd = sosfilt(filter, fwd, &state);
  std::reverse(bwd.begin(), bwd.end());
  return std::vector<double>(bwd.begin() + static_cast<std::ptrdiff_t>(pad),
                             bwd.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace

std::vector<double> filtfilt(const BiquadCascade& filter, std::span<const double> x) {
  const std::size_t pad = filtfilt_padlen(filter);
  if (x.size() <= pad) {
    throw ConfigError("signal of " + std::to_string(x.size()) + " samples is too short for filtfilt (needs more than " +
                      std::to_string(pad) + ")");
  }
  // The forward-first and backward-first orders differ only in their edge
  // transients; averaging them makes the result exactly reversal-symmetric.
  std::vector<double> a = forward_backward(filter, x, pad);
  std::vector<double> rev(x.rbegin(), x.rend());
  std::vector<double> b = forward_backward(filter, rev, pad);
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) a[i] = 0.5 * (a[i] + b[n - 1 - i]);
  return a;
}

}  // namespace min2net::preproc
