#pragma once

// Shared fringe-curve container: signal/noise sampled on a phase grid.

#include <stdexcept>
#include <string>
#include <vector>

namespace combsim {

enum class Provenance { loop_engine, closed_form };

inline std::string to_string(Provenance p) {
    return p == Provenance::loop_engine ? "loop-engine" : "closed-form";
}

struct FringeCurve {
    std::vector<double> phi;
    std::vector<double> signal;  // photon mean per grid point
    std::vector<double> noise;   // photon variance; empty for the mean-field closed form
    Provenance provenance = Provenance::loop_engine;

    bool has_noise() const { return !noise.empty(); }

    void validate() const {
        if (phi.size() != signal.size())
            throw std::invalid_argument("FringeCurve: phi/signal length mismatch");
        if (!noise.empty() && noise.size() != phi.size())
            throw std::invalid_argument("FringeCurve: noise length mismatch");
    }
};

// Uniform grid over [start, stop), endpoint excluded.
inline std::vector<double> phase_grid(double start, double stop, int points) {
    if (points < 2) throw std::invalid_argument("phase_grid: need at least 2 points");
    std::vector<double> grid(points);
    const double step = (stop - start) / points;
    for (int i = 0; i < points; ++i) grid[i] = start + step * i;
    return grid;
}

// Central-difference slope. Uses periodic wraparound when the grid covers a
// full 2*pi period, one-sided differences at the ends otherwise.
inline std::vector<double> curve_slope(const std::vector<double>& phi,
                                       const std::vector<double>& value) {
    const size_t n = phi.size();
    if (n < 3 || value.size() != n)
        throw std::invalid_argument("curve_slope: need >= 3 matched samples");
    const double h = phi[1] - phi[0];
    const bool periodic = std::abs((phi[n - 1] - phi[0]) + h - 6.283185307179586476925286766559) < 1e-9;
    std::vector<double> slope(n);
    if (periodic) {
        for (size_t i = 0; i < n; ++i) {
            const double next = value[(i + 1) % n];
            const double prev = value[(i + n - 1) % n];
            slope[i] = (next - prev) / (2.0 * h);
        }
        return slope;
    }
    slope[0] = (value[1] - value[0]) / (phi[1] - phi[0]);
    slope[n - 1] = (value[n - 1] - value[n - 2]) / (phi[n - 1] - phi[n - 2]);
    for (size_t i = 1; i + 1 < n; ++i)
        slope[i] = (value[i + 1] - value[i - 1]) / (phi[i + 1] - phi[i - 1]);
    return slope;
}

}  // namespace combsim
