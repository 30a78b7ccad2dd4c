#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridwave/simulate.hpp"

namespace gridwave {

/// State-space model dx = A x + B u, y = C x + D u about an equilibrium,
/// with human-readable labels on every axis.
struct LinearModel {
    Eigen::MatrixXd a, b, c, d;
    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
    Eigen::VectorXd x0, u0;

    int input_index(const std::string& label) const;
    int output_index(const std::string& label) const;
};

struct LinearizeOptions {
    double equilibrium_tol = 1e-5;   ///< infinity norm of f(x0, u0)
    double step_scale = 1e-6;        ///< h_j = max(scale, scale * |x0_j|)
};

using RhsFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Central-difference Jacobians of an arbitrary rhs about (x0, u0). Outputs
/// select states by label. Throws NotAtEquilibrium when the residual exceeds
/// the tolerance.
LinearModel linearize(const RhsFn& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& u0,
                      const std::vector<std::string>& state_labels,
                      const std::vector<std::string>& input_labels,
                      const std::vector<std::string>& output_labels,
                      const LinearizeOptions& opt = {});

/// Linearizes an assembled system with the configured input/output selection.
/// Empty selections fall back to the defaults: inputs are every machine's
/// v_ref plus every RES plant's q_ref, outputs every machine's omega. With
/// relative_angles the rotational symmetry is quotiented out exactly: angles
/// become relative to the reference machine, RES current pairs rotate with
/// it, and the reference angle state is removed.
LinearModel linearize_system(const SystemModel& model, const std::vector<std::string>& inputs,
                             const std::vector<std::string>& outputs, bool relative_angles,
                             const LinearizeOptions& opt = {});

struct Mode {
    std::complex<double> lambda;
    double freq_hz = 0.0;       ///< |omega| / 2 pi
    double damping_pct = 0.0;   ///< -sigma / sqrt(sigma^2 + omega^2) * 100
};

struct ModalAnalysis {
    std::vector<Mode> modes;            ///< sorted by damping ratio, ascending
    Eigen::MatrixXcd right;             ///< columns, mode order
    Eigen::MatrixXcd left;              ///< rows, mode order; left * right = I
    std::vector<std::string> state_labels;
};

/// Eigendecomposition with left vectors from the inverse of the right-vector
/// matrix. Throws DefectiveMatrix when that inverse is numerically unusable.
ModalAnalysis eigenanalysis(const LinearModel& model);

/// p(k, i) = |v_ki| |w_ik| / sum_k |v_ki| |w_ik|; every column sums to one.
Eigen::MatrixXd participation_matrix(const ModalAnalysis& ma);

/// Columns rescaled so each mode's largest factor is exactly one.
Eigen::MatrixXd normalize_participation(const Eigen::MatrixXd& p);

struct ModeShapeEntry {
    std::string label;
    double magnitude = 0.0;   ///< scaled so the largest matching entry is 1
    double angle_deg = 0.0;
};

/// Right-eigenvector pattern of one mode restricted to states whose label
/// contains `filter`. Throws EmptyFilter when nothing matches.
std::vector<ModeShapeEntry> mode_shape(const ModalAnalysis& ma, int mode_index,
                                       const std::string& filter);

struct Residue {
    int mode = 0;
    std::string input;
    std::string output;
    std::complex<double> value;       ///< (C v_i)(w_i B)
    double ctrl_mag = 0.0;            ///< |w_i B|
    double obs_mag = 0.0;             ///< |C v_i|
};

/// Transfer-function residues for every (mode, input, output) triple of the
/// model. sum_i R_i / (s - lambda_i) + D reproduces G(s).
std::vector<Residue> residues(const LinearModel& model, const ModalAnalysis& ma);

/// Oscillatory modes (one per conjugate pair) with damping below the
/// threshold, ascending.
std::vector<Mode> lightly_damped(const ModalAnalysis& ma, double zeta_threshold_pct);

}  // namespace gridwave
