#include "gridwave/smallsignal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridwave/errors.hpp"

namespace gridwave {

namespace {

int find_label(const std::vector<std::string>& labels, const std::string& label) {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return -1;
}

int require_label(const std::vector<std::string>& labels, const std::string& label,
                  const char* axis) {
    const int i = find_label(labels, label);
    if (i < 0)
        throw Error(ErrorCode::InvalidCase,
                    std::string(axis) + " label '" + label + "' does not exist");
    return i;
}

}  // namespace

int LinearModel::input_index(const std::string& label) const {
    return require_label(input_labels, label, "input");
}

int LinearModel::output_index(const std::string& label) const {
    return require_label(output_labels, label, "output");
}

LinearModel linearize(const RhsFn& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& u0,
                      const std::vector<std::string>& state_labels,
                      const std::vector<std::string>& input_labels,
                      const std::vector<std::string>& output_labels,
                      const LinearizeOptions& opt) {
    const int n = static_cast<int>(x0.size());
    const int nu = static_cast<int>(u0.size());

    const Eigen::VectorXd res0 = f(x0, u0);
    const double r0 = res0.size() > 0 ? res0.lpNorm<Eigen::Infinity>() : 0.0;
    if (r0 > opt.equilibrium_tol)
        throw Error(ErrorCode::NotAtEquilibrium,
                    "derivative norm " + std::to_string(r0) + " at the linearization point");

    LinearModel lm;
    lm.a.resize(n, n);
    lm.b.resize(n, nu);
    for (int j = 0; j < n; ++j) {
        const double h = std::max(opt.step_scale, opt.step_scale * std::abs(x0(j)));
        Eigen::VectorXd xp = x0, xm = x0;
        xp(j) += h;
        xm(j) -= h;
        lm.a.col(j) = (f(xp, u0) - f(xm, u0)) / (2.0 * h);
    }
    for (int j = 0; j < nu; ++j) {
        const double h = std::max(opt.step_scale, opt.step_scale * std::abs(u0(j)));
        Eigen::VectorXd up = u0, um = u0;
        up(j) += h;
        um(j) -= h;
        lm.b.col(j) = (f(x0, up) - f(x0, um)) / (2.0 * h);
    }

    const int ny = static_cast<int>(output_labels.size());
    lm.c = Eigen::MatrixXd::Zero(ny, n);
    for (int i = 0; i < ny; ++i)
        lm.c(i, require_label(state_labels, output_labels[i], "output")) = 1.0;
    lm.d = Eigen::MatrixXd::Zero(ny, nu);

    lm.state_labels = state_labels;
    lm.input_labels = input_labels;
    lm.output_labels = output_labels;
    lm.x0 = x0;
    lm.u0 = u0;
    return lm;
}

LinearModel linearize_system(const SystemModel& model, const std::vector<std::string>& inputs,
                             const std::vector<std::string>& outputs, bool relative_angles,
                             const LinearizeOptions& opt) {
    const auto& all_inputs = model.input_labels();
    std::vector<std::string> in_sel = inputs;
    if (in_sel.empty()) {
        // Every reference input, leaving the synchronous-frequency channel out.
        in_sel.assign(all_inputs.begin(), all_inputs.end() - 1);
    }
    std::vector<std::string> out_sel = outputs;
    if (out_sel.empty()) {
        for (int k = 0; k < model.n_machines(); ++k)
            out_sel.push_back(model.device_names()[k] + ".omega");
    }

    const RhsFn f = [&model](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return model.rhs(x, u, Topology::Pre);
    };
    LinearModel full = linearize(f, model.initial_state(), model.nominal_inputs(),
                                 model.state_labels(), all_inputs, out_sel, opt);

    // Keep only the selected input columns.
    Eigen::MatrixXd b(full.b.rows(), in_sel.size());
    Eigen::MatrixXd d(full.d.rows(), in_sel.size());
    for (size_t j = 0; j < in_sel.size(); ++j) {
        const int src = require_label(all_inputs, in_sel[j], "input");
        b.col(j) = full.b.col(src);
        d.col(j) = full.d.col(src);
    }
    full.b = b;
    full.d = d;
    full.input_labels = in_sel;
    Eigen::VectorXd u0(in_sel.size());
    for (size_t j = 0; j < in_sel.size(); ++j)
        u0(j) = full.u0(require_label(all_inputs, in_sel[j], "input"));
    full.u0 = u0;

    if (!relative_angles || model.n_machines() == 0) return full;

    // Quotient out the rotational symmetry: every state moves along the
    // direction z (ones at rotor angles, the equilibrium phasor rotated a
    // quarter turn at RES current pairs) without changing the dynamics. New
    // coordinates w = (I - u e_r^T) x are symmetry-invariant except for the
    // reference angle itself, whose column vanishes and which is dropped.
    const int n = static_cast<int>(full.a.rows());
    const std::vector<int> angles = model.angle_state_indices();
    const int ref = angles[0];

    Eigen::VectorXd u_dir = Eigen::VectorXd::Zero(n);
    for (size_t i = 1; i < angles.size(); ++i) u_dir(angles[i]) = 1.0;
    for (const auto& [ip, iq] : model.res_current_state_indices()) {
        u_dir(ip) = -full.x0(iq);
        u_dir(iq) = full.x0(ip);
    }

    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
    s.col(ref) -= u_dir;  // s = I - u e_r^T
    Eigen::MatrixXd s_inv = Eigen::MatrixXd::Identity(n, n);
    s_inv.col(ref) += u_dir;

    const Eigen::MatrixXd a_t = s * full.a * s_inv;
    const Eigen::MatrixXd b_t = s * full.b;
    const Eigen::MatrixXd c_t = full.c * s_inv;

    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (i != ref) keep.push_back(i);

    LinearModel red;
    red.a.resize(n - 1, n - 1);
    red.b.resize(n - 1, full.b.cols());
    red.c.resize(full.c.rows(), n - 1);
    red.x0.resize(n - 1);
    for (int i = 0; i < n - 1; ++i) {
        red.b.row(i) = b_t.row(keep[i]);
        red.c.col(i) = c_t.col(keep[i]);
        red.x0(i) = full.x0(keep[i]);
        red.state_labels.push_back(full.state_labels[keep[i]]);
        for (int j = 0; j < n - 1; ++j) red.a(i, j) = a_t(keep[i], keep[j]);
    }
    red.d = full.d;
    red.input_labels = full.input_labels;
    red.output_labels = full.output_labels;
    red.u0 = full.u0;
    return red;
}

ModalAnalysis eigenanalysis(const LinearModel& model) {
    if (model.a.rows() == 0) {
        ModalAnalysis empty;
        empty.right.resize(0, 0);
        empty.left.resize(0, 0);
        empty.state_labels = model.state_labels;
        return empty;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(model.a);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::DefectiveMatrix, "eigendecomposition did not converge");

    const Eigen::VectorXcd lam = es.eigenvalues();
    const Eigen::MatrixXcd v = es.eigenvectors();
    const int n = static_cast<int>(lam.size());

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(v);
    if (!lu.isInvertible())
        throw Error(ErrorCode::DefectiveMatrix, "right eigenvector matrix is singular");
    const Eigen::MatrixXcd w = lu.inverse();
    const double defect = (w * v - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (defect > 1e-6)
        throw Error(ErrorCode::DefectiveMatrix,
                    "left/right eigenvector identity off by " + std::to_string(defect));

    std::vector<Mode> modes(n);
    for (int i = 0; i < n; ++i) {
        const double mag = std::abs(lam(i));
        modes[i].lambda = lam(i);
        modes[i].freq_hz = std::abs(lam(i).imag()) / (2.0 * M_PI);
        modes[i].damping_pct = mag > 0.0 ? -lam(i).real() / mag * 100.0 : 0.0;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (modes[a].damping_pct != modes[b].damping_pct)
            return modes[a].damping_pct < modes[b].damping_pct;
        if (modes[a].freq_hz != modes[b].freq_hz) return modes[a].freq_hz < modes[b].freq_hz;
        return modes[a].lambda.imag() > modes[b].lambda.imag();
    });

    ModalAnalysis ma;
    ma.right.resize(n, n);
    ma.left.resize(n, n);
    ma.state_labels = model.state_labels;
    for (int i = 0; i < n; ++i) {
        ma.modes.push_back(modes[order[i]]);
        ma.right.col(i) = v.col(order[i]);
        ma.left.row(i) = w.row(order[i]);
    }
    return ma;
}

Eigen::MatrixXd participation_matrix(const ModalAnalysis& ma) {
    const int n = static_cast<int>(ma.modes.size());
    Eigen::MatrixXd p(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k)
            p(k, i) = std::abs(ma.right(k, i)) * std::abs(ma.left(i, k));
        const double sum = p.col(i).sum();
        if (sum > 0.0) p.col(i) /= sum;
    }
    return p;
}

Eigen::MatrixXd normalize_participation(const Eigen::MatrixXd& p) {
    Eigen::MatrixXd out = p;
    for (int i = 0; i < out.cols(); ++i) {
        const double top = out.col(i).maxCoeff();
        if (top > 0.0) out.col(i) /= top;
    }
    return out;
}

std::vector<ModeShapeEntry> mode_shape(const ModalAnalysis& ma, int mode_index,
                                       const std::string& filter) {
    if (mode_index < 0 || mode_index >= static_cast<int>(ma.modes.size()))
        throw Error(ErrorCode::InvalidCase, "mode index out of range");

    std::vector<int> rows;
    for (size_t k = 0; k < ma.state_labels.size(); ++k)
        if (ma.state_labels[k].find(filter) != std::string::npos)
            rows.push_back(static_cast<int>(k));
    if (rows.empty())
        throw Error(ErrorCode::EmptyFilter, "no state label contains '" + filter + "'");

    std::complex<double> top(0.0, 0.0);
    for (int k : rows)
        if (std::abs(ma.right(k, mode_index)) > std::abs(top)) top = ma.right(k, mode_index);

    std::vector<ModeShapeEntry> out;
    for (int k : rows) {
        const std::complex<double> val = ma.right(k, mode_index);
        ModeShapeEntry e;
        e.label = ma.state_labels[k];
        if (std::abs(top) > 0.0) {
            const std::complex<double> rel = val / top;
            e.magnitude = std::abs(rel);
            e.angle_deg = std::arg(rel) * 180.0 / M_PI;
        }
        out.push_back(e);
    }
    return out;
}

std::vector<Residue> residues(const LinearModel& model, const ModalAnalysis& ma) {
    const int n = static_cast<int>(ma.modes.size());
    const Eigen::MatrixXcd obs = model.c * ma.right;           // ny x n
    const Eigen::MatrixXcd ctrl = ma.left * model.b;           // n x nu

    std::vector<Residue> out;
    out.reserve(static_cast<size_t>(n) * model.input_labels.size() *
                model.output_labels.size());
    for (int i = 0; i < n; ++i)
        for (size_t ui = 0; ui < model.input_labels.size(); ++ui)
            for (size_t yi = 0; yi < model.output_labels.size(); ++yi) {
                Residue r;
                r.mode = i;
                r.input = model.input_labels[ui];
                r.output = model.output_labels[yi];
                r.value = obs(yi, i) * ctrl(i, ui);
                r.ctrl_mag = std::abs(ctrl(i, ui));
                r.obs_mag = std::abs(obs(yi, i));
                out.push_back(r);
            }
    return out;
}

std::vector<Mode> lightly_damped(const ModalAnalysis& ma, double zeta_threshold_pct) {
    std::vector<Mode> out;
    for (const auto& mode : ma.modes)
        if (mode.lambda.imag() > 1e-9 && mode.damping_pct < zeta_threshold_pct)
            out.push_back(mode);
    return out;
}

}  // namespace gridwave
