#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "gridwave/errors.hpp"
#include "gridwave/freqresp.hpp"

using namespace gridwave;
using cxd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

/// State-space realization of a SISO rational transfer function given in
/// controllable canonical form.
LinearModel siso(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::RowVectorXd& c,
                 double d) {
    LinearModel m;
    m.a = a;
    m.b = b;
    m.c = c;
    m.d = Eigen::MatrixXd::Constant(1, 1, d);
    for (int i = 0; i < a.rows(); ++i) m.state_labels.push_back("x" + std::to_string(i));
    m.input_labels = {"u"};
    m.output_labels = {"y"};
    m.x0 = Eigen::VectorXd::Zero(a.rows());
    m.u0 = Eigen::VectorXd::Zero(1);
    return m;
}

/// 1 / (s (s + 1) (s + 2)), the classic margin benchmark.
LinearModel triple_pole() {
    Eigen::MatrixXd a(3, 3);
    a << 0, 1, 0, 0, 0, 1, 0, -2, -3;
    Eigen::VectorXd b(3);
    b << 0, 0, 1;
    Eigen::RowVectorXd c(3);
    c << 1, 0, 0;
    return siso(a, b, c, 0.0);
}

}  // namespace

TEST_CASE("first-order lag response at the corner") {
    LinearModel m = siso(Eigen::MatrixXd::Constant(1, 1, -1.0),
                         Eigen::VectorXd::Constant(1, 1.0),
                         Eigen::RowVectorXd::Constant(1, 1.0), 0.0);
    FrequencyGrid g{1.0, 10.0, 2};  // first grid point is exactly the corner
    FrequencyResponse fr = evaluate_response(m, 0, 0, g);
    REQUIRE(fr.omega.size() == 2);
    REQUIRE(fr.omega[0] == 1.0);
    CHECK(std::abs(fr.g[0] - cxd(0.5, -0.5)) < 1e-12);
    CHECK(fr.mag_db[0] == doctest::Approx(-10.0 * std::log10(2.0)).epsilon(1e-10));
    CHECK(fr.phase_deg[0] == doctest::Approx(-45.0).epsilon(1e-10));
}

TEST_CASE("phase stays unwrapped through 180 degrees") {
    LinearModel m = triple_pole();
    FrequencyGrid g{1e-2, 1e2, 600};
    FrequencyResponse fr = evaluate_response(m, 0, 0, g);
    for (std::size_t i = 1; i < fr.phase_deg.size(); ++i)
        CHECK(std::abs(fr.phase_deg[i] - fr.phase_deg[i - 1]) < 170.0);
    // integrator start near -90, third-order rolloff ends near -270
    CHECK(fr.phase_deg.front() == doctest::Approx(-90.0).epsilon(0.02));
    CHECK(fr.phase_deg.back() == doctest::Approx(-270.0).epsilon(0.02));
}

TEST_CASE("margins of the triple-pole benchmark") {
    LinearModel m = triple_pole();
    MarginReport mr = margins(m, 0, 0);
    REQUIRE(mr.gain_margin_db.has_value());
    REQUIRE(mr.phase_margin_deg.has_value());

    // phase hits -180 where the imaginary part of (jw)(jw+1)(jw+2) vanishes:
    // 2w - w^3 changes sign at w = sqrt(2), where |L| = 1/6
    CHECK(std::abs(*mr.omega_pc - std::sqrt(2.0)) < 1e-4);
    CHECK(std::abs(*mr.gain_margin_db - 20.0 * std::log10(6.0)) < 0.01);
    CHECK(std::abs(*mr.gain_margin_db - 15.563) < 0.01);

    // unit gain: w^2 (w^2 + 1)(w^2 + 4) = 1, solved here by bisection
    double lo = 0.1, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double f = mid * mid * (mid * mid + 1.0) * (mid * mid + 4.0) - 1.0;
        (f > 0 ? hi : lo) = mid;
    }
    double w_gc = 0.5 * (lo + hi);
    double pm = 180.0 - 90.0 - (std::atan(w_gc) + std::atan(w_gc / 2.0)) * 180.0 / M_PI;
    REQUIRE(mr.omega_gc.has_value());
    CHECK(std::abs(*mr.omega_gc - w_gc) < 1e-4);
    CHECK(std::abs(*mr.phase_margin_deg - pm) < 1e-3);
    CHECK(std::abs(*mr.phase_margin_deg - 53.4) < 0.5);
    CHECK(mr.stable_closed_loop);  // s^3 + 3 s^2 + 2 s + 1 passes Routh
}

TEST_CASE("an all-pass-free plant without crossings reports no margin") {
    // 0.5 / (s + 1) never reaches unit gain or -180 degrees
    LinearModel m = siso(Eigen::MatrixXd::Constant(1, 1, -1.0),
                         Eigen::VectorXd::Constant(1, 1.0),
                         Eigen::RowVectorXd::Constant(1, 0.5), 0.0);
    MarginReport mr = margins(m, 0, 0);
    CHECK_FALSE(mr.gain_margin_db.has_value());
    CHECK_FALSE(mr.phase_margin_deg.has_value());
    CHECK(mr.stable_closed_loop);
}

TEST_CASE("poles and zeros of factored benchmarks") {
    // (s + 5) / ((s + 1)(s + 10))
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, -10, -11;
    Eigen::VectorXd b(2);
    b << 0, 1;
    Eigen::RowVectorXd c(2);
    c << 5, 1;
    PoleZeroReport pz = pole_zero(siso(a, b, c, 0.0), 0, 0);
    REQUIRE(pz.poles.size() == 2);
    REQUIRE(pz.zeros.size() == 1);
    std::sort(pz.poles.begin(), pz.poles.end(),
              [](cxd l, cxd r) { return l.real() < r.real(); });
    CHECK(std::abs(pz.poles[0] - cxd(-10, 0)) < 1e-8);
    CHECK(std::abs(pz.poles[1] - cxd(-1, 0)) < 1e-8);
    CHECK(std::abs(pz.zeros[0] - cxd(-5, 0)) < 1e-8);

    // feedthrough shifts the zero: 1 - 1/(s + 3) = (s + 2)/(s + 3)
    PoleZeroReport pz2 = pole_zero(siso(Eigen::MatrixXd::Constant(1, 1, -3.0),
                                        Eigen::VectorXd::Constant(1, 1.0),
                                        Eigen::RowVectorXd::Constant(1, -1.0), 1.0),
                                   0, 0);
    REQUIRE(pz2.zeros.size() == 1);
    CHECK(std::abs(pz2.zeros[0] - cxd(-2, 0)) < 1e-8);
}

TEST_CASE("a grid point on an undamped resonance is refused") {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, -1, 0;  // poles at exactly +-j
    Eigen::VectorXd b(2);
    b << 0, 1;
    Eigen::RowVectorXd c(2);
    c << 1, 0;
    LinearModel m = siso(a, b, c, 0.0);
    FrequencyGrid g{1.0, 10.0, 2};
    CHECK_THROWS_AS(evaluate_response(m, 0, 0, g), Error);
}

TEST_CASE("report files land on disk") {
    LinearModel m = triple_pole();
    FrequencyGrid g{1e-2, 1e2, 50};
    FrequencyResponse fr = evaluate_response(m, 0, 0, g);
    MarginReport mr = margins(m, 0, 0, g);
    PoleZeroReport pz = pole_zero(m, 0, 0);

    fs::path d = fs::temp_directory_path() / "gw_freq_reports";
    fs::remove_all(d);
    fs::create_directories(d);
    export_frequency_reports(fr, mr, pz, d);

    for (const char* name : {"bode.csv", "nyquist.csv", "nichols.csv", "poles_zeros.csv",
                             "margins.csv"})
        CHECK(fs::exists(d / name));

    std::ifstream bode(d / "bode.csv");
    std::string header, first;
    std::getline(bode, header);
    std::getline(bode, first);
    CHECK(header == "omega,mag_db,phase_deg");
    CHECK_FALSE(first.empty());
}
