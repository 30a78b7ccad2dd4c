#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gridwave {

enum class BusKind { Slack, Pv, Pq };

/// One network bus. Loads are net scheduled demand in per unit on the system
/// base; buses that host a machine or RES plant encode their scheduled
/// generation as negative load (the device realizes the injection, so those
/// values are never absorbed as impedances).
struct BusRecord {
    int id = 0;
    BusKind kind = BusKind::Pq;
    double v_set = 1.0;       ///< pu, setpoint for slack/pv, initial guess otherwise
    double theta_deg = 0.0;   ///< slack angle, degrees in files (radians internally elsewhere)
    double p_load = 0.0;      ///< pu
    double q_load = 0.0;      ///< pu
    double g_shunt = 0.0;     ///< pu admittance to ground
    double b_shunt = 0.0;     ///< pu
};

/// Pi-model branch, optionally a transformer (tap/shift on the from side).
struct BranchRecord {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;          ///< total line charging
    double tap = 1.0;        ///< 0 in files also means nominal
    double shift_deg = 0.0;
    bool in_service = true;
};

/// Sixth-order synchronous machine constants, pu on the system base.
struct MachineRecord {
    int bus = 0;
    double r_s = 0.0;
    double x_ls = 0.0;
    double x_d = 0.0;
    double x_d_p = 0.0;
    double x_d_pp = 0.0;
    double x_q = 0.0;
    double x_q_p = 0.0;
    double x_q_pp = 0.0;
    double t_do_p = 0.0;   ///< seconds
    double t_do_pp = 0.0;
    double t_qo_p = 0.0;
    double t_qo_pp = 0.0;
    double h = 0.0;        ///< inertia, seconds
    double t_fw = 0.0;     ///< constant friction/windage torque, pu
};

/// IEEE Type I excitation system. Saturation is sat_a * exp(sat_b * e_fd);
/// absent regulator ceiling/floor means the output is unlimited.
struct ExciterRecord {
    int machine = 0;       ///< 1-based index into the machine table
    double k_a = 0.0;
    double t_a = 0.0;
    double k_e = 0.0;
    double t_e = 0.0;
    double k_f = 0.0;
    double t_f = 0.0;
    double sat_a = 0.0;
    double sat_b = 0.0;
    std::optional<double> vr_max;
    std::optional<double> vr_min;
};

/// Steam turbine with speed governor.
struct TurbineRecord {
    int machine = 0;       ///< 1-based index into the machine table
    double t_ch = 0.0;     ///< steam chest, seconds
    double t_sv = 0.0;     ///< steam valve, seconds
    double r_d = 0.0;      ///< droop, pu
};

/// Renewable plant: converter current lags plus a reactive-power PI loop.
struct ResPlantRecord {
    int bus = 0;
    double t_g = 0.02;     ///< converter lag, seconds, must be in (0, 1]
    double k_p = 0.0;
    double k_i = 0.0;
    std::optional<double> ip_max;
    std::optional<double> iq_max;
    std::optional<double> iq_min;
    double v_freeze = 0.01;  ///< pu; below this the current commands hold
};

/// Flat key = value study configuration.
struct ScenarioConfig {
    double base_mva = 100.0;
    double freq_hz = 60.0;
    double t_end = 10.0;
    double dt = 1e-3;
    std::optional<int> fault_bus;
    double t_f1 = 0.0;
    double t_f2 = 0.0;
    double fault_admittance = 1e7;
    bool relative_angles = false;
    std::vector<std::string> input_selection;   ///< empty means default set
    std::vector<std::string> output_selection;  ///< empty means default set
    double zeta_threshold = 10.0;               ///< percent, lightly-damped cutoff
};

/// A complete study case: one directory on disk, one value in memory.
struct NetworkCase {
    std::string name;
    std::vector<BusRecord> buses;
    std::vector<BranchRecord> branches;
    std::vector<MachineRecord> machines;
    std::vector<ExciterRecord> exciters;
    std::vector<TurbineRecord> turbines;
    std::vector<ResPlantRecord> res_plants;
    ScenarioConfig scenario;

    /// Row index of a bus id, or -1 when absent.
    int bus_index(int id) const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].id == id) return static_cast<int>(i);
        return -1;
    }

    /// True when any bus hosts a dynamic device.
    bool has_devices() const { return !machines.empty() || !res_plants.empty(); }
};

struct Violation {
    std::string where;    ///< table plus row or id
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

}  // namespace gridwave
