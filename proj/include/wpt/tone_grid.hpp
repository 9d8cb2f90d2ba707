#pragma once

#include <stdexcept>

namespace wpt {

// Uniform frequency comb: tone n (1-based) sits at f0 + (n-1) * delta_f.
struct ToneGrid {
    double f0;       // carrier frequency [Hz]
    double delta_f;  // tone spacing [Hz]
    int n_tones;

    ToneGrid(double f0_hz, double delta_f_hz, int n)
        : f0(f0_hz), delta_f(delta_f_hz), n_tones(n) {
        if (!(f0 > 0.0)) throw std::invalid_argument("ToneGrid: f0 must be > 0");
        if (!(delta_f > 0.0)) throw std::invalid_argument("ToneGrid: delta_f must be > 0");
        if (n_tones < 1) throw std::invalid_argument("ToneGrid: n_tones must be >= 1");
    }

    // 1-based tone index.
    double tone_frequency(int n) const {
        if (n < 1 || n > n_tones) throw std::out_of_range("ToneGrid: tone index out of range");
        return f0 + static_cast<double>(n - 1) * delta_f;
    }
};

}  // namespace wpt
