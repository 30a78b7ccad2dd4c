#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <vector>

#include "gridwave/smallsignal.hpp"

namespace gridwave {

struct FrequencyGrid {
    double omega_min = 1e-2;   ///< rad/s
    double omega_max = 1e3;
    int points = 400;          ///< log spaced
};

struct FrequencyResponse {
    std::vector<double> omega;
    std::vector<std::complex<double>> g;
    std::vector<double> mag_db;
    std::vector<double> phase_deg;   ///< unwrapped along the grid
};

/// SISO response G(jw) = c (jwI - A)^-1 b + d evaluated by linear solves.
/// Throws GridHitsPole when a grid point collides with an eigenvalue and
/// AmbiguousPhaseUnwrap when adjacent points jump by more than 170 degrees.
FrequencyResponse evaluate_response(const LinearModel& model, int input, int output,
                                    const FrequencyGrid& grid = {});

struct MarginReport {
    std::optional<double> gain_margin_db;    ///< absent: no phase crossover
    std::optional<double> omega_pc;          ///< rad/s
    std::optional<double> phase_margin_deg;  ///< absent: no gain crossover
    std::optional<double> omega_gc;
    bool stable_closed_loop = false;         ///< unity negative feedback eigencheck
};

/// Stability margins from the response with crossovers refined by bisection
/// on the continuous model (1e-6 rad/s). When several crossovers exist the
/// smallest margins are reported.
MarginReport margins(const LinearModel& model, int input, int output,
                     const FrequencyGrid& grid = {});

struct PoleZeroReport {
    std::vector<std::complex<double>> poles;
    std::vector<std::complex<double>> zeros;   ///< finite transmission zeros
};

/// Poles from eig(A); zeros as the finite generalized eigenvalues of the
/// system pencil ([A b; c d], diag(I, 0)).
PoleZeroReport pole_zero(const LinearModel& model, int input, int output);

struct PlotExportOptions {
    bool svg = false;
};

/// Writes bode.csv, nyquist.csv, nichols.csv, poles_zeros.csv and margins.csv
/// (plus SVG renderings when requested) into `dir`.
void export_frequency_reports(const FrequencyResponse& fr, const MarginReport& mr,
                              const PoleZeroReport& pz, const std::filesystem::path& dir,
                              const PlotExportOptions& opt = {});

}  // namespace gridwave
