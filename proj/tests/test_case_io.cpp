#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gridwave/case_io.hpp"
#include "gridwave/errors.hpp"

using namespace gridwave;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GRIDWAVE_DATA_DIR;

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("gw_io_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

/// Minimal loadable two-bus skeleton the error tests mutate.
void write_skeleton(const fs::path& d) {
    write(d / "buses.csv",
          "# id,kind,v_set,theta_deg,p_load,q_load,g_shunt,b_shunt\n"
          "1,slack,1.0,0,0,0,0,0\n"
          "2,pq,1.0,0,0.5,0.1,0,0\n");
    write(d / "branches.csv",
          "# from,to,r,x,b,tap,shift_deg,status\n"
          "1,2,0.01,0.1,0.02,1,0,in\n");
    write(d / "scenario.cfg", "t_end = 1\ndt = 0.01\n");
}

ErrorCode load_error(const fs::path& d) {
    try {
        load_case(d);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected load_case to throw");
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("bundled cases load with expected shape") {
    NetworkCase smib = load_case(kData / "cases" / "smib");
    CHECK(smib.buses.size() == 3);
    CHECK(smib.machines.size() == 2);
    CHECK(smib.res_plants.empty());
    CHECK(smib.machines[1].x_d == doctest::Approx(1.8));
    CHECK(smib.machines[1].h == doctest::Approx(3.5));
    CHECK(smib.scenario.fault_bus == 3);
    CHECK(smib.scenario.t_f1 == doctest::Approx(0.096));
    CHECK(smib.scenario.relative_angles);
    CHECK(validate_case(smib).ok());

    NetworkCase big = load_case(kData / "cases" / "ieee68");
    CHECK(big.buses.size() == 68);
    CHECK(big.branches.size() == 82);
    CHECK(big.machines.size() == 13);
    CHECK(big.res_plants.size() == 3);
    CHECK(validate_case(big).ok());
}

TEST_CASE("save then load is the identity on every table") {
    NetworkCase c = load_case(kData / "cases" / "ieee68");
    fs::path d = fresh_dir("roundtrip");
    save_case(c, d);
    NetworkCase r = load_case(d);

    REQUIRE(r.buses.size() == c.buses.size());
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        CHECK(r.buses[i].id == c.buses[i].id);
        CHECK(r.buses[i].kind == c.buses[i].kind);
        CHECK(r.buses[i].v_set == c.buses[i].v_set);
        CHECK(r.buses[i].p_load == c.buses[i].p_load);
        CHECK(r.buses[i].q_load == c.buses[i].q_load);
    }
    REQUIRE(r.branches.size() == c.branches.size());
    for (std::size_t i = 0; i < c.branches.size(); ++i) {
        CHECK(r.branches[i].x == c.branches[i].x);
        CHECK(r.branches[i].tap == c.branches[i].tap);
        CHECK(r.branches[i].in_service == c.branches[i].in_service);
    }
    REQUIRE(r.machines.size() == c.machines.size());
    for (std::size_t i = 0; i < c.machines.size(); ++i) {
        CHECK(r.machines[i].x_d_pp == c.machines[i].x_d_pp);
        CHECK(r.machines[i].t_do_p == c.machines[i].t_do_p);
        CHECK(r.machines[i].h == c.machines[i].h);
    }
    REQUIRE(r.res_plants.size() == c.res_plants.size());
    for (std::size_t i = 0; i < c.res_plants.size(); ++i) {
        CHECK(r.res_plants[i].t_g == c.res_plants[i].t_g);
        CHECK(r.res_plants[i].ip_max == c.res_plants[i].ip_max);
        CHECK(r.res_plants[i].v_freeze == c.res_plants[i].v_freeze);
    }
    REQUIRE(r.exciters.size() == c.exciters.size());
    CHECK(r.exciters[0].vr_max == c.exciters[0].vr_max);
    CHECK(r.scenario.fault_bus == c.scenario.fault_bus);
    CHECK(r.scenario.dt == c.scenario.dt);
    CHECK(r.scenario.fault_admittance == c.scenario.fault_admittance);
    CHECK(r.scenario.relative_angles == c.scenario.relative_angles);
}

TEST_CASE("missing required file") {
    fs::path d = fresh_dir("missing");
    write_skeleton(d);
    fs::remove(d / "buses.csv");
    CHECK(load_error(d) == ErrorCode::MissingFile);
}

TEST_CASE("malformed rows carry their location") {
    fs::path d = fresh_dir("badfloat");
    write_skeleton(d);
    write(d / "buses.csv",
          "1,slack,1.0,0,0,0,0,0\n"
          "2,pq,abc,0,0,0,0,0\n");
    CHECK(load_error(d) == ErrorCode::MalformedRow);

    write(d / "buses.csv",
          "1,slack,1.0,0,0,0,0,0\n"
          "2,pq,1.0,0\n");
    CHECK(load_error(d) == ErrorCode::MalformedRow);

    write_skeleton(d);
    write(d / "scenario.cfg", "t_end 1\n");
    CHECK(load_error(d) == ErrorCode::MalformedRow);
}

TEST_CASE("duplicate identifiers are rejected") {
    fs::path d = fresh_dir("dup");
    write_skeleton(d);
    write(d / "buses.csv",
          "1,slack,1.0,0,0,0,0,0\n"
          "2,pq,1.0,0,0,0,0,0\n"
          "2,pq,1.0,0,0,0,0,0\n");
    CHECK(load_error(d) == ErrorCode::DuplicateId);
}

TEST_CASE("references to absent rows are rejected") {
    fs::path d = fresh_dir("dangling");
    write_skeleton(d);
    write(d / "branches.csv", "1,9,0.01,0.1,0,1,0,in\n");
    CHECK(load_error(d) == ErrorCode::DanglingReference);

    write_skeleton(d);
    write(d / "machines.csv", "9,0,0.1,1.8,0.3,0.2,1.7,0.5,0.2,8,0.03,0.4,0.05,3.5,0\n");
    CHECK(load_error(d) == ErrorCode::DanglingReference);
}

TEST_CASE("validation rules") {
    NetworkCase c = load_case(kData / "cases" / "ieee68");
    REQUIRE(validate_case(c).ok());

    SUBCASE("slack count") {
        c.buses[0].kind = BusKind::Slack;  // a second slack next to the real one
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("reactance ordering") {
        c.machines[2].x_d_pp = c.machines[2].x_d_p + 1.0;
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("time constants") {
        c.machines[0].t_do_p = 0.0;
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("converter lag range") {
        c.res_plants[0].t_g = 1.5;
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("every machine needs its controllers") {
        c.turbines.pop_back();
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("fault window ordering") {
        c.scenario.t_f2 = c.scenario.t_f1;
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("fault bus must exist") {
        c.scenario.fault_bus = 777;
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("connectivity") {
        c.buses.push_back({99, BusKind::Pq, 1.0, 0, 0, 0, 0, 0});
        CHECK_FALSE(validate_case(c).ok());
    }
    SUBCASE("zero-impedance branch") {
        c.branches[0].r = 0.0;
        c.branches[0].x = 0.0;
        CHECK_FALSE(validate_case(c).ok());
    }
}
