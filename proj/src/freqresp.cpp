#include "gridwave/freqresp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include "gridwave/csv.hpp"
#include "gridwave/errors.hpp"
#include "gridwave/svgplot.hpp"

namespace gridwave {

namespace {

using cd = std::complex<double>;

struct Channel {
    Eigen::MatrixXcd a;
    Eigen::VectorXcd b;
    Eigen::RowVectorXcd c;
    double d = 0.0;
    Eigen::VectorXcd poles;

    cd eval(double omega) const {
        const int n = static_cast<int>(a.rows());
        Eigen::MatrixXcd m = -a;
        m.diagonal().array() += cd(0.0, omega);
        const Eigen::VectorXcd x = m.partialPivLu().solve(b);
        return (c * x)(0) + d;
    }
};

Channel make_channel(const LinearModel& model, int input, int output) {
    if (input < 0 || input >= model.b.cols() || output < 0 || output >= model.c.rows())
        throw Error(ErrorCode::InvalidCase, "input/output index outside the model");
    Channel ch;
    ch.a = model.a.cast<cd>();
    ch.b = model.b.col(input).cast<cd>();
    ch.c = model.c.row(output).cast<cd>();
    ch.d = model.d(output, input);
    ch.poles = Eigen::EigenSolver<Eigen::MatrixXd>(model.a).eigenvalues();
    return ch;
}

std::vector<double> log_grid(const FrequencyGrid& grid) {
    if (grid.points < 2 || grid.omega_min <= 0.0 || grid.omega_max <= grid.omega_min)
        throw Error(ErrorCode::InvalidCase, "frequency grid must be positive and increasing");
    std::vector<double> w(grid.points);
    const double ratio = grid.omega_max / grid.omega_min;
    for (int i = 0; i < grid.points; ++i)
        w[i] = grid.omega_min * std::pow(ratio, static_cast<double>(i) / (grid.points - 1));
    return w;
}

/// Bisection to an absolute omega tolerance; fa and fb must differ in sign.
double bisect(const std::function<double(double)>& f, double a, double b, double fa) {
    while (b - a > 1e-6) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

double wrap_deg(double d) { return d - 360.0 * std::round(d / 360.0); }

}  // namespace

FrequencyResponse evaluate_response(const LinearModel& model, int input, int output,
                                    const FrequencyGrid& grid) {
    const Channel ch = make_channel(model, input, output);
    FrequencyResponse fr;
    fr.omega = log_grid(grid);
    fr.g.reserve(fr.omega.size());
    fr.mag_db.reserve(fr.omega.size());
    fr.phase_deg.reserve(fr.omega.size());

    for (double w : fr.omega) {
        for (int i = 0; i < ch.poles.size(); ++i) {
            const double tol = 1e-9 * std::max(1.0, std::abs(ch.poles(i)));
            if (std::abs(cd(0.0, w) - ch.poles(i)) < tol)
                throw Error(ErrorCode::GridHitsPole,
                            "grid point " + csv::format_double(w) + " rad/s sits on a pole");
        }
        const cd g = ch.eval(w);
        fr.g.push_back(g);
        fr.mag_db.push_back(20.0 * std::log10(std::max(std::abs(g), 1e-300)));
        const double raw = std::arg(g) * 180.0 / M_PI;
        if (fr.phase_deg.empty()) {
            fr.phase_deg.push_back(raw);
        } else {
            const double prev = fr.phase_deg.back();
            const double step = wrap_deg(raw - prev);
            if (std::abs(step) > 170.0)
                throw Error(ErrorCode::AmbiguousPhaseUnwrap,
                            "phase steps " + csv::format_double(step) + " deg near " +
                                csv::format_double(w) + " rad/s; refine the grid");
            fr.phase_deg.push_back(prev + step);
        }
    }
    return fr;
}

MarginReport margins(const LinearModel& model, int input, int output,
                     const FrequencyGrid& grid) {
    const Channel ch = make_channel(model, input, output);
    const FrequencyResponse fr = evaluate_response(model, input, output, grid);
    const int n = static_cast<int>(fr.omega.size());

    MarginReport mr;

    // Gain crossovers: |L| passes through one; keep the smallest |margin|.
    const auto mag_err = [&](double w) { return std::abs(ch.eval(w)) - 1.0; };
    for (int i = 0; i + 1 < n; ++i) {
        const double fa = std::abs(fr.g[i]) - 1.0;
        const double fb = std::abs(fr.g[i + 1]) - 1.0;
        if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
            const double w = fa == 0.0 ? fr.omega[i] : bisect(mag_err, fr.omega[i],
                                                              fr.omega[i + 1], fa);
            const cd l = ch.eval(w);
            const double pm = wrap_deg(180.0 + std::arg(l) * 180.0 / M_PI);
            if (!mr.phase_margin_deg || std::abs(pm) < std::abs(*mr.phase_margin_deg)) {
                mr.phase_margin_deg = pm;
                mr.omega_gc = w;
            }
        }
    }

    // Phase crossovers: L crosses the negative real axis (Im flips, Re < 0).
    const auto im_part = [&](double w) { return ch.eval(w).imag(); };
    for (int i = 0; i + 1 < n; ++i) {
        const double fa = fr.g[i].imag();
        const double fb = fr.g[i + 1].imag();
        if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
            const double w = fa == 0.0 ? fr.omega[i] : bisect(im_part, fr.omega[i],
                                                              fr.omega[i + 1], fa);
            const cd l = ch.eval(w);
            if (l.real() >= 0.0) continue;
            const double gm = -20.0 * std::log10(std::max(std::abs(l), 1e-300));
            if (!mr.gain_margin_db || std::abs(gm) < std::abs(*mr.gain_margin_db)) {
                mr.gain_margin_db = gm;
                mr.omega_pc = w;
            }
        }
    }

    // Closed-loop check under unity negative feedback.
    if (std::abs(1.0 + ch.d) > 1e-12) {
        const Eigen::MatrixXd a_cl =
            model.a - model.b.col(input) * model.c.row(output) / (1.0 + ch.d);
        const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(a_cl).eigenvalues();
        mr.stable_closed_loop = eig.real().maxCoeff() < 0.0;
    }
    return mr;
}

PoleZeroReport pole_zero(const LinearModel& model, int input, int output) {
    if (input < 0 || input >= model.b.cols() || output < 0 || output >= model.c.rows())
        throw Error(ErrorCode::InvalidCase, "input/output index outside the model");
    const int n = static_cast<int>(model.a.rows());

    PoleZeroReport pz;
    const Eigen::VectorXcd poles = Eigen::EigenSolver<Eigen::MatrixXd>(model.a).eigenvalues();
    for (int i = 0; i < n; ++i) pz.poles.push_back(poles(i));

    // Transmission zeros: generalized eigenvalues of the system pencil; the
    // descriptor row squashes the feedthrough equation, infinite eigenvalues
    // (tiny beta) are discarded.
    Eigen::MatrixXd m(n + 1, n + 1), w(n + 1, n + 1);
    m << model.a, model.b.col(input), model.c.row(output),
        Eigen::MatrixXd::Constant(1, 1, model.d(output, input));
    w.setZero();
    w.topLeftCorner(n, n).setIdentity();

    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(m, w);
    const auto alphas = ges.alphas();
    const auto betas = ges.betas();
    for (int i = 0; i < alphas.size(); ++i) {
        if (std::abs(betas(i)) > 1e-9 * std::max(1.0, std::abs(alphas(i))))
            pz.zeros.push_back(alphas(i) / betas(i));
    }
    return pz;
}

void export_frequency_reports(const FrequencyResponse& fr, const MarginReport& mr,
                              const PoleZeroReport& pz, const std::filesystem::path& dir,
                              const PlotExportOptions& opt) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    {
        csv::Writer w(dir / "bode.csv");
        w.field("omega").field("mag_db").field("phase_deg").end_row();
        for (size_t i = 0; i < fr.omega.size(); ++i) {
            w.field(fr.omega[i]).field(fr.mag_db[i]).field(fr.phase_deg[i]).end_row();
        }
        w.close();
    }
    {
        csv::Writer w(dir / "nyquist.csv");
        w.field("re").field("im").end_row();
        for (const auto& g : fr.g) w.field(g.real()).field(g.imag()).end_row();
        w.close();
    }
    {
        csv::Writer w(dir / "nichols.csv");
        w.field("phase_deg").field("mag_db").end_row();
        for (size_t i = 0; i < fr.omega.size(); ++i)
            w.field(fr.phase_deg[i]).field(fr.mag_db[i]).end_row();
        w.close();
    }
    {
        csv::Writer w(dir / "poles_zeros.csv");
        w.field("kind").field("re").field("im").end_row();
        for (const auto& p : pz.poles)
            w.field("pole").field(p.real()).field(p.imag()).end_row();
        for (const auto& z : pz.zeros)
            w.field("zero").field(z.real()).field(z.imag()).end_row();
        w.close();
    }
    {
        csv::Writer w(dir / "margins.csv");
        w.field("gain_margin_db").field("omega_pc").field("phase_margin_deg").field("omega_gc")
            .field("stable_closed_loop").end_row();
        auto put = [&w](const std::optional<double>& v) {
            if (v)
                w.field(*v);
            else
                w.field("none");
        };
        put(mr.gain_margin_db);
        put(mr.omega_pc);
        put(mr.phase_margin_deg);
        put(mr.omega_gc);
        w.field(mr.stable_closed_loop ? "yes" : "no").end_row();
        w.close();
    }

    if (!opt.svg) return;

    svg::PlotSpec mag;
    mag.title = "Bode magnitude";
    mag.x_label = "omega, rad/s";
    mag.y_label = "gain, dB";
    mag.log_x = true;
    mag.series.push_back({"", fr.omega, fr.mag_db, false});
    svg::write_plot(dir / "bode_mag.svg", mag);

    svg::PlotSpec ph;
    ph.title = "Bode phase";
    ph.x_label = "omega, rad/s";
    ph.y_label = "phase, deg";
    ph.log_x = true;
    ph.series.push_back({"", fr.omega, fr.phase_deg, false});
    svg::write_plot(dir / "bode_phase.svg", ph);

    svg::PlotSpec ny;
    ny.title = "Nyquist";
    ny.x_label = "Re";
    ny.y_label = "Im";
    std::vector<double> re, im;
    for (const auto& g : fr.g) {
        re.push_back(g.real());
        im.push_back(g.imag());
    }
    ny.series.push_back({"", re, im, false});
    ny.series.push_back({"critical point", {-1.0}, {0.0}, true});
    svg::write_plot(dir / "nyquist.svg", ny);

    svg::PlotSpec ni;
    ni.title = "Nichols";
    ni.x_label = "phase, deg";
    ni.y_label = "gain, dB";
    ni.series.push_back({"", fr.phase_deg, fr.mag_db, false});
    ni.series.push_back({"critical point", {-180.0}, {0.0}, true});
    svg::write_plot(dir / "nichols.svg", ni);

    svg::PlotSpec pzp;
    pzp.title = "Poles and zeros";
    pzp.x_label = "Re";
    pzp.y_label = "Im";
    std::vector<double> pr, pi, zr, zi;
    for (const auto& p : pz.poles) {
        pr.push_back(p.real());
        pi.push_back(p.imag());
    }
    for (const auto& z : pz.zeros) {
        zr.push_back(z.real());
        zi.push_back(z.imag());
    }
    pzp.series.push_back({"poles", pr, pi, true});
    if (!zr.empty()) pzp.series.push_back({"zeros", zr, zi, true});
    svg::write_plot(dir / "poles_zeros.svg", pzp);
}

}  // namespace gridwave
