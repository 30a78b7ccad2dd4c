#include <doctest.h>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "gridwave/case_io.hpp"
#include "gridwave/errors.hpp"
#include "gridwave/powerflow.hpp"

using namespace gridwave;
using cxd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GRIDWAVE_DATA_DIR;

/// Admittance matrix assembled directly from branch primitives, sharing no
/// code with the library (guards the test against a common-mode bug).
Eigen::MatrixXcd assemble_y(const NetworkCase& c) {
    int n = static_cast<int>(c.buses.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const BranchRecord& br : c.branches) {
        if (!br.in_service) continue;
        int f = c.bus_index(br.from), t = c.bus_index(br.to);
        cxd ys = 1.0 / cxd(br.r, br.x);
        cxd half(0.0, br.b / 2.0);
        double tap = br.tap == 0.0 ? 1.0 : br.tap;
        cxd tr = std::polar(tap, br.shift_deg * M_PI / 180.0);
        y(f, f) += (ys + half) / (tap * tap);
        y(t, t) += ys + half;
        y(f, t) -= ys / std::conj(tr);
        y(t, f) -= ys / tr;
    }
    for (std::size_t i = 0; i < c.buses.size(); ++i)
        y(static_cast<int>(i), static_cast<int>(i)) += cxd(c.buses[i].g_shunt, c.buses[i].b_shunt);
    return y;
}

/// Independent solver in rectangular voltage coordinates: unknowns (e, f)
/// per non-slack bus, active power plus either reactive power (pq) or the
/// squared-magnitude pin (pv) as equations. Shares neither the coordinate
/// system nor any code with the library's polar solver.
std::vector<cxd> rectangular_newton(const NetworkCase& c, int iters) {
    Eigen::MatrixXcd yc = assemble_y(c);
    int n = yc.rows();
    Eigen::MatrixXd G = yc.real(), B = yc.imag();

    Eigen::VectorXd e(n), f(n);
    int slack = 0;
    for (int i = 0; i < n; ++i) {
        if (c.buses[i].kind == BusKind::Slack) slack = i;
        e(i) = c.buses[i].kind == BusKind::Pq ? 1.0 : c.buses[i].v_set;
        f(i) = 0.0;
    }
    e(slack) = c.buses[slack].v_set * std::cos(c.buses[slack].theta_deg * M_PI / 180.0);
    f(slack) = c.buses[slack].v_set * std::sin(c.buses[slack].theta_deg * M_PI / 180.0);

    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
        if (i != slack) free_idx.push_back(i);
    int m = static_cast<int>(free_idx.size());

    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd cre = G * e - B * f;  // real and imaginary currents
        Eigen::VectorXd cim = G * f + B * e;

        Eigen::VectorXd rhs(2 * m);
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
        for (int a = 0; a < m; ++a) {
            int i = free_idx[a];
            const BusRecord& b = c.buses[i];
            double p = e(i) * cre(i) + f(i) * cim(i);
            rhs(2 * a) = -b.p_load - p;
            for (int k = 0; k < m; ++k) {
                int j = free_idx[k];
                jac(2 * a, 2 * k) = e(i) * G(i, j) + f(i) * B(i, j) + (i == j ? cre(i) : 0.0);
                jac(2 * a, 2 * k + 1) =
                    -e(i) * B(i, j) + f(i) * G(i, j) + (i == j ? cim(i) : 0.0);
            }
            if (b.kind == BusKind::Pq) {
                double q = f(i) * cre(i) - e(i) * cim(i);
                rhs(2 * a + 1) = -b.q_load - q;
                for (int k = 0; k < m; ++k) {
                    int j = free_idx[k];
                    jac(2 * a + 1, 2 * k) =
                        f(i) * G(i, j) - e(i) * B(i, j) - (i == j ? cim(i) : 0.0);
                    jac(2 * a + 1, 2 * k + 1) =
                        -f(i) * B(i, j) - e(i) * G(i, j) + (i == j ? cre(i) : 0.0);
                }
            } else {
                rhs(2 * a + 1) = b.v_set * b.v_set - e(i) * e(i) - f(i) * f(i);
                jac(2 * a + 1, 2 * a) = 2.0 * e(i);
                jac(2 * a + 1, 2 * a + 1) = 2.0 * f(i);
            }
        }
        if (rhs.cwiseAbs().maxCoeff() < 1e-12) break;
        Eigen::VectorXd dx = jac.fullPivLu().solve(rhs);
        for (int a = 0; a < m; ++a) {
            e(free_idx[a]) += dx(2 * a);
            f(free_idx[a]) += dx(2 * a + 1);
        }
    }

    std::vector<cxd> out(n);
    for (int i = 0; i < n; ++i) out[i] = cxd(e(i), f(i));
    return out;
}

/// Largest scheduled-power violation of a voltage profile, from primitives.
double mismatch(const NetworkCase& c, const std::vector<cxd>& v) {
    Eigen::MatrixXcd y = assemble_y(c);
    int n = y.rows();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const BusRecord& b = c.buses[i];
        if (b.kind == BusKind::Slack) continue;
        cxd acc = 0;
        for (int k = 0; k < n; ++k) acc += y(i, k) * v[k];
        cxd s = v[i] * std::conj(acc);
        worst = std::max(worst, std::abs(s.real() + b.p_load));
        if (b.kind == BusKind::Pq) worst = std::max(worst, std::abs(s.imag() + b.q_load));
    }
    return worst;
}

}  // namespace

TEST_CASE("lossless feeder matches the closed-form quadratic") {
    NetworkCase c = load_case(kData / "cases" / "twobus");
    PowerFlowSolution pf = solve_powerflow(c);
    CHECK(pf.iterations <= 10);
    CHECK(pf.max_mismatch <= 1e-8);

    // P X = V1 V2 sin th, Q = 0 forces V2^2 = V1 V2 cos th, so
    // V2^4 - V2^2 + (P X)^2 = 0 with the high-voltage root physical.
    double px = c.buses[1].p_load * c.branches[0].x;
    double v2 = std::sqrt((1.0 + std::sqrt(1.0 - 4.0 * px * px)) / 2.0);
    double th2 = -std::asin(px / v2);

    CHECK(std::abs(pf.v_mag[1] - v2) < 1e-6);
    CHECK(std::abs(pf.v_ang[1] - th2) < 1e-6);
    CHECK(pf.v_ang[1] < 0.0);  // power flows toward the load, the angle lags
    CHECK(std::abs(pf.v_mag[1] - 0.998746) < 1e-6);
    CHECK(std::abs(std::abs(pf.v_ang[1]) * 180.0 / M_PI - 2.8696) < 1e-3);
}

TEST_CASE("injections balance load plus losses") {
    NetworkCase c = load_case(kData / "cases" / "twobus");
    PowerFlowSolution pf = solve_powerflow(c);
    // lossless line: the slack must deliver exactly the scheduled load
    CHECK(std::abs(pf.p_inj[0] - 0.5) < 1e-8);
    CHECK(std::abs(pf.p_inj[1] + 0.5) < 1e-8);
    // reactive losses i^2 x are covered by the two ends
    double x = c.branches[0].x;
    double i2 = std::norm((std::polar(1.0, 0.0) - pf.voltage(1)) / cxd(0.0, x));
    CHECK(std::abs(pf.q_inj[0] + pf.q_inj[1] - i2 * x) < 1e-8);
}

TEST_CASE("bundled network agrees with an independent solver") {
    NetworkCase c = load_case(kData / "cases" / "ieee68");
    PowerFlowSolution pf = solve_powerflow(c);
    CHECK(pf.iterations <= 10);
    CHECK(pf.max_mismatch <= 1e-8);

    // the Newton profile must satisfy the balance equations from primitives
    std::vector<cxd> mine(c.buses.size());
    for (std::size_t i = 0; i < c.buses.size(); ++i) mine[i] = pf.voltage(static_cast<int>(i));
    CHECK(mismatch(c, mine) < 1e-7);

    std::vector<cxd> fp = rectangular_newton(c, 30);
    REQUIRE(mismatch(c, fp) < 1e-8);
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        CHECK(std::abs(std::abs(fp[i]) - pf.v_mag[i]) < 1e-6);
        CHECK(std::abs(fp[i] - mine[i]) < 1e-6);
    }
}

TEST_CASE("pv buses hold their magnitude, pq buses hold their schedule") {
    NetworkCase c = load_case(kData / "cases" / "ieee68");
    PowerFlowSolution pf = solve_powerflow(c);
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        const BusRecord& b = c.buses[i];
        if (b.kind == BusKind::Pv) CHECK(pf.v_mag[i] == doctest::Approx(b.v_set).epsilon(1e-10));
        if (b.kind == BusKind::Pq) {
            CHECK(std::abs(pf.p_inj[i] + b.p_load) < 1e-7);
            CHECK(std::abs(pf.q_inj[i] + b.q_load) < 1e-7);
        }
    }
}

TEST_CASE("an unservable load diverges cleanly") {
    NetworkCase c = load_case(kData / "cases" / "twobus");
    c.buses[1].p_load = 100.0;  // far past the transfer limit of x = 0.1
    CHECK_THROWS_AS(solve_powerflow(c), Error);
}
