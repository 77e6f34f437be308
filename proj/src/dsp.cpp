#include "cks/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace cks {

namespace {
constexpr double kPi = std::numbers::pi;
}

// --- SosFilter -------------------------------------------------------------

void SosFilter::apply(const float* in, float* out, size_t n) const {
    std::vector<double> s1(sections.size(), 0.0), s2(sections.size(), 0.0);
    for (size_t i = 0; i < n; ++i) {
        double x = gain * static_cast<double>(in[i]);
        for (size_t k = 0; k < sections.size(); ++k) {
            const Biquad& q = sections[k];
            const double y = q.b0 * x + s1[k];
            s1[k] = q.b1 * x - q.a1 * y + s2[k];
            s2[k] = q.b2 * x - q.a2 * y;
            x = y;
        }
        out[i] = static_cast<float>(x);
    }
}

std::vector<float> SosFilter::apply(const std::vector<float>& in) const {
    std::vector<float> out(in.size());
    apply(in.data(), out.data(), in.size());
    return out;
}

std::complex<double> SosFilter::response(double f_hz, double sample_rate) const {
    const double w = 2.0 * kPi * f_hz / sample_rate;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = gain;
    for (const Biquad& q : sections)
        h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
    return h;
}

double SosFilter::magnitude_db(double f_hz, double sample_rate) const {
    return 20.0 * std::log10(std::abs(response(f_hz, sample_rate)));
}

std::pair<std::vector<double>, std::vector<double>> SosFilter::transfer_function() const {
    auto mul = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> c(a.size() + b.size() - 1, 0.0);
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
        return c;
    };
    std::vector<double> num{gain}, den{1.0};
    for (const Biquad& q : sections) {
        num = mul(num, {q.b0, q.b1, q.b2});
        den = mul(den, {1.0, q.a1, q.a2});
    }
    return {num, den};
}

// --- Butterworth bandpass ----------------------------------------------------

SosFilter butterworth_bandpass(int order_lp, double low_hz, double high_hz, double sample_rate) {
    if (!(0 < low_hz && low_hz < high_hz && high_hz < sample_rate / 2))
        throw std::invalid_argument("butterworth_bandpass: need 0 < low < high < rate/2");

    using cd = std::complex<double>;
    const double fs2 = 2.0 * sample_rate;
    const double w1 = fs2 * std::tan(kPi * low_hz / sample_rate);
    const double w2 = fs2 * std::tan(kPi * high_hz / sample_rate);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // Analog prototype poles, then lowpass -> bandpass (each pole splits in two).
    std::vector<cd> poles;
    for (int k = 0; k < order_lp; ++k) {
        const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order_lp);
        const cd p(-std::sin(theta), std::cos(theta));
        const cd b = bw * p * 0.5;
        const cd d = std::sqrt(b * b - w0sq);
        poles.push_back(b + d);
        poles.push_back(b - d);
    }

    // Bilinear transform. Zeros land at z = +1 (from s=0) and z = -1 (from s=inf).
    std::vector<cd> zpoles;
    zpoles.reserve(poles.size());
    for (const cd& s : poles) zpoles.push_back((fs2 + s) / (fs2 - s));

    // Pair conjugates (and leftover real poles) into second-order sections.
    constexpr double tol = 1e-9;
    std::vector<cd> pos, real;
    for (const cd& p : zpoles) {
        if (p.imag() > tol)
            pos.push_back(p);
        else if (std::abs(p.imag()) <= tol)
            real.push_back(p);
    }
    SosFilter f;
    for (const cd& p : pos) {
        Biquad q;
        q.b0 = 1;
        q.b1 = 0;
        q.b2 = -1;
        q.a1 = -2.0 * p.real();
        q.a2 = std::norm(p);
        f.sections.push_back(q);
    }
    std::sort(real.begin(), real.end(), [](const cd& a, const cd& b) { return a.real() < b.real(); });
    for (size_t i = 0; i + 1 < real.size(); i += 2) {
        Biquad q;
        q.b0 = 1;
        q.b1 = 0;
        q.b2 = -1;
        q.a1 = -(real[i].real() + real[i + 1].real());
        q.a2 = real[i].real() * real[i + 1].real();
        f.sections.push_back(q);
    }

    // Unity gain at the (warped) centre frequency.
    const double f_center = sample_rate / kPi * std::atan(std::sqrt(w0sq) / fs2);
    f.gain = 1.0;
    f.gain = 1.0 / std::abs(f.response(f_center, sample_rate));
    return f;
}

// --- FFT ---------------------------------------------------------------------

void fft_inplace(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_inplace: size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<double> power_spectrum(const float* x, size_t n) {
    std::vector<std::complex<double>> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = x[i];
    fft_inplace(a);
    std::vector<double> p(n / 2 + 1);
    for (size_t i = 0; i < p.size(); ++i) p[i] = std::norm(a[i]);
    return p;
}

// --- Resampler -----------------------------------------------------------------

double kaiser_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double h = x * 0.5;
    for (int k = 1; k < 64; ++k) {
        term *= (h / k) * (h / k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

Resampler Resampler::design(int in_rate, int out_rate, int taps_per_phase, double kaiser_beta) {
    if (in_rate <= 0 || out_rate <= 0) throw std::invalid_argument("Resampler: bad rates");
    const int g = std::gcd(in_rate, out_rate);
    Resampler r;
    r.up = out_rate / g;
    r.down = in_rate / g;
    r.taps_per_phase = taps_per_phase;

    const int n = taps_per_phase * r.up;
    const double virtual_rate = static_cast<double>(in_rate) * r.up;
    // Cutoff relative to the output rate: 0.45 * out_rate (0.9 of the new Nyquist).
    const double nu = 0.45 * out_rate / virtual_rate;
    const double centre = (n - 1) / 2.0;
    const double i0b = kaiser_i0(kaiser_beta);

    r.prototype.resize(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = i - centre;
        const double x = 2.0 * nu * t;
        const double sinc = (x == 0.0) ? 1.0 : std::sin(kPi * x) / (kPi * x);
        const double u = t / centre;
        const double win = kaiser_i0(kaiser_beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0b;
        r.prototype[i] = 2.0 * nu * sinc * win;
        sum += r.prototype[i];
    }
    const double scale = r.up / sum;
    for (double& h : r.prototype) h *= scale;
    return r;
}

std::vector<float> Resampler::apply(const std::vector<float>& in) const {
    const long long n_in = static_cast<long long>(in.size());
    const long long n_out = std::llround(static_cast<double>(n_in) * up / down);
    const long long n_taps = static_cast<long long>(prototype.size());
    const long long centre = (n_taps - 1) / 2;
    std::vector<float> out(static_cast<size_t>(n_out));
    for (long long t = 0; t < n_out; ++t) {
        const long long base = t * down + centre;
        long long m = base / up;           // highest contributing input index
        long long j = base - m * up;       // first tap of this phase
        double acc = 0.0;
        for (; j < n_taps; j += up, --m) {
            if (m >= 0 && m < n_in) acc += prototype[static_cast<size_t>(j)] * in[static_cast<size_t>(m)];
        }
        out[static_cast<size_t>(t)] = static_cast<float>(acc);
    }
    return out;
}

}  // namespace cks
