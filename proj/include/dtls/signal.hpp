#pragma once

// Measurements on sampled time traces.

#include <complex>
#include <vector>

namespace dtls {

struct SpectralPeak {
    double omega = 0.0;     // angular frequency of the strongest component
    double magnitude = 0.0; // |X(omega)| of the windowed, detrended trace
};

enum class Window {
    hann,       // stationary signals
    rectangular // transients that have decayed by the end of the record
};

struct FrequencyOptions {
    double min_omega = 0.0; // components below are ignored
    Window window = Window::hann;
    bool detrend = true;    // remove a least-squares line first
};

// Strongest non-zero spectral component of a uniformly sampled real trace,
// from the zero-padded FFT with parabolic refinement of the log magnitude.
// Throws std::invalid_argument for fewer than 8 samples or dt <= 0.
SpectralPeak dominant_frequency(const std::vector<double>& x, double dt, const FrequencyOptions& opts = {});

// One damped complex exponential a z^n, z = exp(lambda dt).
struct ExponentialMode {
    std::complex<double> lambda; // rate: Re < 0 decays, Im is the angular frequency
    std::complex<double> amplitude;
};

// Matrix-pencil decomposition of a uniformly sampled trace into damped
// exponentials. Modes whose singular values fall below rel_tol times the
// largest are discarded. Sorted by spectral weight |a| / max(|Re lambda|, 1/T).
std::vector<ExponentialMode> exponential_modes(const std::vector<double>& x, double dt, double rel_tol = 1e-8);

// The trace with its non-oscillating modes (|Im lambda| below min_omega)
// subtracted; what is left is the oscillatory part.
std::vector<double> oscillatory_part(const std::vector<double>& x, double dt, double min_omega, double rel_tol = 1e-8);

// Rate k of |x(t) - asymptote| ~ exp(-k t), by least squares on the log of
// the samples whose deviation exceeds floor * max deviation.
double envelope_decay_rate(const std::vector<double>& t, const std::vector<std::complex<double>>& x,
                           std::complex<double> asymptote = {}, double floor = 1e-6);

// First time at which x has covered 1 - 1/e of the way from x(0) to the
// asymptote (linear interpolation between samples). Returns a negative value
// if it never does.
double buildup_time(const std::vector<double>& t, const std::vector<double>& x, double asymptote);

} // namespace dtls
