#include <doctest.h>

#include <cmath>

#include "gridwave/case_io.hpp"
#include "gridwave/errors.hpp"
#include "gridwave/powerflow.hpp"
#include "gridwave/simulate.hpp"

using namespace gridwave;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GRIDWAVE_DATA_DIR;

struct Loaded {
    NetworkCase c;
    PowerFlowSolution pf;
};

Loaded load(const char* name) {
    Loaded out{load_case(kData / "cases" / name), {}};
    out.pf = solve_powerflow(out.c);
    return out;
}

}  // namespace

TEST_CASE("state layout and labels") {
    Loaded l = load("smib");
    SystemModel model(l.c, l.pf);
    CHECK(model.n_states() == 2 * kMachineStates);
    CHECK(model.state_labels().size() == static_cast<std::size_t>(model.n_states()));
    CHECK(model.state_labels()[0] == "G1.delta");
    CHECK(model.state_labels()[kMachineStates] == "G2.delta");
    // v_ref per machine plus the synchronous-speed input
    CHECK(model.input_labels().size() == 3);
}

TEST_CASE("without a disturbance the trajectory stays put") {
    Loaded l = load("smib");
    SystemModel model(l.c, l.pf);
    CHECK(model.rhs(0.0, model.initial_state()).lpNorm<Eigen::Infinity>() < 1e-8);

    ScenarioConfig sc = l.c.scenario;
    sc.fault_bus.reset();
    SimulationResult r = run_simulation(model, sc);
    Eigen::VectorXd x0 = r.states.row(0);
    double drift = 0.0;
    for (int i = 0; i < r.states.rows(); ++i)
        drift = std::max(drift, (r.states.row(i).transpose() - x0).lpNorm<Eigen::Infinity>());
    CHECK(drift < 1e-8);
    CHECK(r.events.empty());
}

TEST_CASE("fault application and clearing are recorded on exact grid points") {
    Loaded l = load("smib");
    SystemModel model(l.c, l.pf);

    ScenarioConfig sc = l.c.scenario;
    sc.dt = 0.0035;  // does not divide the fault times
    SimulationResult r = run_simulation(model, sc);

    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].t == doctest::Approx(sc.t_f1).epsilon(1e-12));
    CHECK(r.events[1].t == doctest::Approx(sc.t_f2).epsilon(1e-12));
    bool has_f1 = false, has_f2 = false;
    for (double t : r.t) {
        if (std::abs(t - sc.t_f1) < 1e-12) has_f1 = true;
        if (std::abs(t - sc.t_f2) < 1e-12) has_f2 = true;
    }
    CHECK(has_f1);
    CHECK(has_f2);
}

TEST_CASE("the faulted bus is clamped near ground during the fault") {
    Loaded l = load("smib");
    SystemModel model(l.c, l.pf);
    SimulationResult r = run_simulation(model, l.c.scenario);

    int fb = l.c.bus_index(*l.c.scenario.fault_bus);
    bool pre_ok = true, dip_ok = false, rec_ok = false;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        double v = r.bus_v_mag(k, fb);
        if (r.t[k] < l.c.scenario.t_f1 && v < 0.5) pre_ok = false;
        if (r.t[k] > l.c.scenario.t_f1 + 1e-9 && r.t[k] < l.c.scenario.t_f2 - 1e-9)
            dip_ok = v < 1e-3;
        if (r.t[k] > l.c.scenario.t_f2 + 0.5 && v > 0.5) rec_ok = true;
    }
    CHECK(pre_ok);
    CHECK(dip_ok);
    CHECK(rec_ok);
}

TEST_CASE("electrical frequency tracks the disturbance and returns") {
    Loaded l = load("smib");
    SystemModel model(l.c, l.pf);
    SimulationResult r = run_simulation(model, l.c.scenario);
    REQUIRE(r.bus_freq.cols() == 2);

    double peak = 0.0;
    for (std::size_t k = 0; k < r.t.size(); ++k)
        peak = std::max(peak, std::abs(r.bus_freq(k, 1) - 60.0));
    CHECK(r.bus_freq(0, 1) == doctest::Approx(60.0).epsilon(1e-9));
    CHECK(peak > 0.05);  // the machine actually swings
    CHECK(peak < 5.0);   // but stays in synchronism
}

TEST_CASE("integration error scales like a fourth-order method") {
    Loaded l = load("smib");
    SystemModel model(l.c, l.pf);

    auto final_state = [&](double dt) {
        ScenarioConfig sc = l.c.scenario;
        sc.dt = dt;
        SimulationResult r = run_simulation(model, sc);
        return Eigen::VectorXd(r.states.row(r.states.rows() - 1));
    };

    Eigen::VectorXd ref = final_state(0.004 / 16);
    Eigen::VectorXd coarse = final_state(0.004);
    Eigen::VectorXd half = final_state(0.002);

    Eigen::VectorXd scale = ref.cwiseAbs().cwiseMax(1.0);
    double e1 = ((coarse - ref).cwiseQuotient(scale)).lpNorm<Eigen::Infinity>();
    double e2 = ((half - ref).cwiseQuotient(scale)).lpNorm<Eigen::Infinity>();
    REQUIRE(e2 > 1e-14);  // not already at machine precision
    double order = std::log2(e1 / e2);
    CHECK(order >= 3.5);
}

TEST_CASE("runaway states raise a diagnosable failure") {
    Loaded l = load("smib");
    SystemModel model(l.c, l.pf);
    SimulateOptions opt;
    opt.blowup_limit = 300.0;  // below synchronous speed, trips immediately
    CHECK_THROWS_AS(run_simulation(model, l.c.scenario, opt), Error);
}
