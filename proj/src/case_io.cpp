#include "gridwave/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <map>
#include <set>

#include "gridwave/csv.hpp"
#include "gridwave/errors.hpp"

namespace gridwave {

namespace {

[[noreturn]] void malformed(const std::string& file, int line, const std::string& why) {
    throw Error(ErrorCode::MalformedRow,
                file + ":" + std::to_string(line) + ": " + why);
}

double parse_double(const std::string& file, int line, const std::string& s) {
    if (s.empty()) malformed(file, line, "empty numeric field");
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) malformed(file, line, "bad number '" + s + "'");
    return v;
}

int parse_int(const std::string& file, int line, const std::string& s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        malformed(file, line, "bad integer '" + s + "'");
    return v;
}

std::optional<double> parse_optional(const std::string& file, int line, const std::string& s) {
    if (s == "none" || s == "NONE" || s == "None") return std::nullopt;
    return parse_double(file, line, s);
}

bool is_none(const std::string& s) { return s == "none" || s == "NONE" || s == "None"; }

std::string opt_field(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string("none");
}

}  // namespace

NetworkCase load_case(const std::filesystem::path& dir) {
    NetworkCase c;
    c.name = dir.filename().string();
    if (c.name.empty()) c.name = dir.parent_path().filename().string();

    // --- buses.csv ---------------------------------------------------------
    {
        const std::string file = "buses.csv";
        std::set<int> seen;
        for (const auto& row : csv::read_file(dir / file)) {
            if (row.fields.size() != 8)
                malformed(file, row.line, "expected 8 fields, got " +
                                              std::to_string(row.fields.size()));
            BusRecord b;
            b.id = parse_int(file, row.line, row.fields[0]);
            const std::string& kind = row.fields[1];
            if (kind == "slack") b.kind = BusKind::Slack;
            else if (kind == "pv") b.kind = BusKind::Pv;
            else if (kind == "pq") b.kind = BusKind::Pq;
            else malformed(file, row.line, "unknown bus kind '" + kind + "'");
            b.v_set = parse_double(file, row.line, row.fields[2]);
            b.theta_deg = parse_double(file, row.line, row.fields[3]);
            b.p_load = parse_double(file, row.line, row.fields[4]);
            b.q_load = parse_double(file, row.line, row.fields[5]);
            b.g_shunt = parse_double(file, row.line, row.fields[6]);
            b.b_shunt = parse_double(file, row.line, row.fields[7]);
            if (!seen.insert(b.id).second)
                throw Error(ErrorCode::DuplicateId,
                            "bus " + std::to_string(b.id) + " defined twice");
            c.buses.push_back(b);
        }
        if (c.buses.empty()) malformed(file, 0, "no buses defined");
    }

    auto require_bus = [&](int id, const std::string& file, int line) {
        if (c.bus_index(id) < 0)
            throw Error(ErrorCode::DanglingReference,
                        file + ":" + std::to_string(line) + ": bus " + std::to_string(id) +
                            " does not exist");
    };

    // --- branches.csv ------------------------------------------------------
    {
        const std::string file = "branches.csv";
        for (const auto& row : csv::read_file(dir / file)) {
            if (row.fields.size() != 8)
                malformed(file, row.line, "expected 8 fields, got " +
                                              std::to_string(row.fields.size()));
            BranchRecord br;
            br.from = parse_int(file, row.line, row.fields[0]);
            br.to = parse_int(file, row.line, row.fields[1]);
            br.r = parse_double(file, row.line, row.fields[2]);
            br.x = parse_double(file, row.line, row.fields[3]);
            br.b = parse_double(file, row.line, row.fields[4]);
            br.tap = parse_double(file, row.line, row.fields[5]);
            br.shift_deg = parse_double(file, row.line, row.fields[6]);
            const std::string& status = row.fields[7];
            if (status == "in") br.in_service = true;
            else if (status == "out") br.in_service = false;
            else malformed(file, row.line, "status must be in|out, got '" + status + "'");
            require_bus(br.from, file, row.line);
            require_bus(br.to, file, row.line);
            c.branches.push_back(br);
        }
    }

    // --- machines.csv (optional) ------------------------------------------
    if (std::filesystem::exists(dir / "machines.csv")) {
        const std::string file = "machines.csv";
        std::set<int> seen;
        for (const auto& row : csv::read_file(dir / file)) {
            if (row.fields.size() < 14 || row.fields.size() > 15)
                malformed(file, row.line, "expected 14 or 15 fields");
            MachineRecord m;
            m.bus = parse_int(file, row.line, row.fields[0]);
            m.r_s = parse_double(file, row.line, row.fields[1]);
            m.x_ls = parse_double(file, row.line, row.fields[2]);
            m.x_d = parse_double(file, row.line, row.fields[3]);
            m.x_d_p = parse_double(file, row.line, row.fields[4]);
            m.x_d_pp = parse_double(file, row.line, row.fields[5]);
            m.x_q = parse_double(file, row.line, row.fields[6]);
            m.x_q_p = parse_double(file, row.line, row.fields[7]);
            m.x_q_pp = parse_double(file, row.line, row.fields[8]);
            m.t_do_p = parse_double(file, row.line, row.fields[9]);
            m.t_do_pp = parse_double(file, row.line, row.fields[10]);
            m.t_qo_p = parse_double(file, row.line, row.fields[11]);
            m.t_qo_pp = parse_double(file, row.line, row.fields[12]);
            m.h = parse_double(file, row.line, row.fields[13]);
            if (row.fields.size() == 15) m.t_fw = parse_double(file, row.line, row.fields[14]);
            require_bus(m.bus, file, row.line);
            if (!seen.insert(m.bus).second)
                throw Error(ErrorCode::DuplicateId,
                            "two machines on bus " + std::to_string(m.bus));
            c.machines.push_back(m);
        }
    }

    auto require_machine = [&](int idx, const std::string& file, int line) {
        if (idx < 1 || idx > static_cast<int>(c.machines.size()))
            throw Error(ErrorCode::DanglingReference,
                        file + ":" + std::to_string(line) + ": machine " + std::to_string(idx) +
                            " does not exist");
    };

    // --- exciters.csv (optional) ------------------------------------------
    if (std::filesystem::exists(dir / "exciters.csv")) {
        const std::string file = "exciters.csv";
        std::set<int> seen;
        for (const auto& row : csv::read_file(dir / file)) {
            if (row.fields.size() < 7 || row.fields.size() > 11)
                malformed(file, row.line, "expected 7 to 11 fields");
            ExciterRecord e;
            e.machine = parse_int(file, row.line, row.fields[0]);
            e.k_a = parse_double(file, row.line, row.fields[1]);
            e.t_a = parse_double(file, row.line, row.fields[2]);
            e.k_e = parse_double(file, row.line, row.fields[3]);
            e.t_e = parse_double(file, row.line, row.fields[4]);
            e.k_f = parse_double(file, row.line, row.fields[5]);
            e.t_f = parse_double(file, row.line, row.fields[6]);
            if (row.fields.size() > 7) e.sat_a = parse_double(file, row.line, row.fields[7]);
            if (row.fields.size() > 8) e.sat_b = parse_double(file, row.line, row.fields[8]);
            if (row.fields.size() > 9) e.vr_max = parse_optional(file, row.line, row.fields[9]);
            if (row.fields.size() > 10) e.vr_min = parse_optional(file, row.line, row.fields[10]);
            require_machine(e.machine, file, row.line);
            if (!seen.insert(e.machine).second)
                throw Error(ErrorCode::DuplicateId,
                            "two exciters for machine " + std::to_string(e.machine));
            c.exciters.push_back(e);
        }
    }

    // --- turbines.csv (optional) ------------------------------------------
    if (std::filesystem::exists(dir / "turbines.csv")) {
        const std::string file = "turbines.csv";
        std::set<int> seen;
        for (const auto& row : csv::read_file(dir / file)) {
            if (row.fields.size() != 4) malformed(file, row.line, "expected 4 fields");
            TurbineRecord t;
            t.machine = parse_int(file, row.line, row.fields[0]);
            t.t_ch = parse_double(file, row.line, row.fields[1]);
            t.t_sv = parse_double(file, row.line, row.fields[2]);
            t.r_d = parse_double(file, row.line, row.fields[3]);
            require_machine(t.machine, file, row.line);
            if (!seen.insert(t.machine).second)
                throw Error(ErrorCode::DuplicateId,
                            "two turbines for machine " + std::to_string(t.machine));
            c.turbines.push_back(t);
        }
    }

    // --- res_plants.csv (optional) ----------------------------------------
    if (std::filesystem::exists(dir / "res_plants.csv")) {
        const std::string file = "res_plants.csv";
        std::set<int> seen;
        for (const auto& row : csv::read_file(dir / file)) {
            if (row.fields.size() < 4 || row.fields.size() > 8)
                malformed(file, row.line, "expected 4 to 8 fields");
            ResPlantRecord r;
            r.bus = parse_int(file, row.line, row.fields[0]);
            r.t_g = parse_double(file, row.line, row.fields[1]);
            r.k_p = parse_double(file, row.line, row.fields[2]);
            r.k_i = parse_double(file, row.line, row.fields[3]);
            if (row.fields.size() > 4) r.ip_max = parse_optional(file, row.line, row.fields[4]);
            if (row.fields.size() > 5) r.iq_max = parse_optional(file, row.line, row.fields[5]);
            if (row.fields.size() > 6) r.iq_min = parse_optional(file, row.line, row.fields[6]);
            if (row.fields.size() > 7 && !is_none(row.fields[7]))
                r.v_freeze = parse_double(file, row.line, row.fields[7]);
            require_bus(r.bus, file, row.line);
            if (!seen.insert(r.bus).second)
                throw Error(ErrorCode::DuplicateId,
                            "two RES plants on bus " + std::to_string(r.bus));
            c.res_plants.push_back(r);
        }
    }

    // --- scenario.cfg ------------------------------------------------------
    {
        const std::string file = "scenario.cfg";
        std::ifstream in(dir / file);
        if (!in) throw Error(ErrorCode::MissingFile, (dir / file).string());
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t") != std::string::npos)
                    malformed(file, lineno, "expected key = value");
                continue;
            }
            auto trim = [](std::string s) {
                std::size_t b = s.find_first_not_of(" \t");
                std::size_t e = s.find_last_not_of(" \t");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            ScenarioConfig& sc = c.scenario;
            auto parse_labels = [&](const std::string& v) {
                std::vector<std::string> out;
                if (v == "default") return out;
                std::size_t pos = 0;
                while (pos <= v.size()) {
                    std::size_t comma = v.find(',', pos);
                    std::string item =
                        trim(v.substr(pos, comma == std::string::npos ? comma : comma - pos));
                    if (!item.empty()) out.push_back(item);
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
                return out;
            };
            if (key == "base_mva") sc.base_mva = parse_double(file, lineno, value);
            else if (key == "freq_hz") sc.freq_hz = parse_double(file, lineno, value);
            else if (key == "t_end") sc.t_end = parse_double(file, lineno, value);
            else if (key == "dt") sc.dt = parse_double(file, lineno, value);
            else if (key == "fault_bus") {
                if (is_none(value)) sc.fault_bus.reset();
                else sc.fault_bus = parse_int(file, lineno, value);
            } else if (key == "t_f1") sc.t_f1 = parse_double(file, lineno, value);
            else if (key == "t_f2") sc.t_f2 = parse_double(file, lineno, value);
            else if (key == "fault_admittance") sc.fault_admittance = parse_double(file, lineno, value);
            else if (key == "relative_angles") {
                if (value == "true") sc.relative_angles = true;
                else if (value == "false") sc.relative_angles = false;
                else malformed(file, lineno, "relative_angles must be true|false");
            } else if (key == "input_selection") sc.input_selection = parse_labels(value);
            else if (key == "output_selection") sc.output_selection = parse_labels(value);
            else if (key == "zeta_threshold") sc.zeta_threshold = parse_double(file, lineno, value);
            else malformed(file, lineno, "unknown key '" + key + "'");
        }
        if (c.scenario.fault_bus) require_bus(*c.scenario.fault_bus, file, 0);
    }

    return c;
}

void save_case(const NetworkCase& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        csv::Writer w(dir / "buses.csv");
        w.comment("id,kind,v_set,theta_deg,p_load,q_load,g_shunt,b_shunt");
        for (const auto& b : c.buses) {
            w.field(b.id);
            w.field(b.kind == BusKind::Slack ? "slack" : b.kind == BusKind::Pv ? "pv" : "pq");
            w.field(b.v_set);
            w.field(b.theta_deg);
            w.field(b.p_load);
            w.field(b.q_load);
            w.field(b.g_shunt);
            w.field(b.b_shunt);
            w.end_row();
        }
    }
    {
        csv::Writer w(dir / "branches.csv");
        w.comment("from,to,r,x,b,tap,shift_deg,status");
        for (const auto& br : c.branches) {
            w.field(br.from);
            w.field(br.to);
            w.field(br.r);
            w.field(br.x);
            w.field(br.b);
            w.field(br.tap);
            w.field(br.shift_deg);
            w.field(br.in_service ? "in" : "out");
            w.end_row();
        }
    }
    if (!c.machines.empty()) {
        csv::Writer w(dir / "machines.csv");
        w.comment(
            "bus,r_s,x_ls,x_d,x_d_p,x_d_pp,x_q,x_q_p,x_q_pp,t_do_p,t_do_pp,t_qo_p,t_qo_pp,h,t_fw");
        for (const auto& m : c.machines) {
            w.field(m.bus);
            w.field(m.r_s);
            w.field(m.x_ls);
            w.field(m.x_d);
            w.field(m.x_d_p);
            w.field(m.x_d_pp);
            w.field(m.x_q);
            w.field(m.x_q_p);
            w.field(m.x_q_pp);
            w.field(m.t_do_p);
            w.field(m.t_do_pp);
            w.field(m.t_qo_p);
            w.field(m.t_qo_pp);
            w.field(m.h);
            w.field(m.t_fw);
            w.end_row();
        }
    }
    if (!c.exciters.empty()) {
        csv::Writer w(dir / "exciters.csv");
        w.comment("machine,k_a,t_a,k_e,t_e,k_f,t_f,sat_a,sat_b,vr_max,vr_min");
        for (const auto& e : c.exciters) {
            w.field(e.machine);
            w.field(e.k_a);
            w.field(e.t_a);
            w.field(e.k_e);
            w.field(e.t_e);
            w.field(e.k_f);
            w.field(e.t_f);
            w.field(e.sat_a);
            w.field(e.sat_b);
            w.field(opt_field(e.vr_max));
            w.field(opt_field(e.vr_min));
            w.end_row();
        }
    }
    if (!c.turbines.empty()) {
        csv::Writer w(dir / "turbines.csv");
        w.comment("machine,t_ch,t_sv,r_d");
        for (const auto& t : c.turbines) {
            w.field(t.machine);
            w.field(t.t_ch);
            w.field(t.t_sv);
            w.field(t.r_d);
            w.end_row();
        }
    }
    if (!c.res_plants.empty()) {
        csv::Writer w(dir / "res_plants.csv");
        w.comment("bus,t_g,k_p,k_i,ip_max,iq_max,iq_min,v_freeze");
        for (const auto& r : c.res_plants) {
            w.field(r.bus);
            w.field(r.t_g);
            w.field(r.k_p);
            w.field(r.k_i);
            w.field(opt_field(r.ip_max));
            w.field(opt_field(r.iq_max));
            w.field(opt_field(r.iq_min));
            w.field(r.v_freeze);
            w.end_row();
        }
    }
    {
        csv::Writer w(dir / "scenario.cfg");
        const ScenarioConfig& sc = c.scenario;
        auto labels = [](const std::vector<std::string>& v) {
            if (v.empty()) return std::string("default");
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ",";
                s += v[i];
            }
            return s;
        };
        w.raw("base_mva = " + csv::format_double(sc.base_mva));
        w.raw("freq_hz = " + csv::format_double(sc.freq_hz));
        w.raw("t_end = " + csv::format_double(sc.t_end));
        w.raw("dt = " + csv::format_double(sc.dt));
        w.raw("fault_bus = " + (sc.fault_bus ? std::to_string(*sc.fault_bus) : "none"));
        w.raw("t_f1 = " + csv::format_double(sc.t_f1));
        w.raw("t_f2 = " + csv::format_double(sc.t_f2));
        w.raw("fault_admittance = " + csv::format_double(sc.fault_admittance));
        w.raw(std::string("relative_angles = ") + (sc.relative_angles ? "true" : "false"));
        w.raw("input_selection = " + labels(sc.input_selection));
        w.raw("output_selection = " + labels(sc.output_selection));
        w.raw("zeta_threshold = " + csv::format_double(sc.zeta_threshold));
    }
}

ValidationReport validate_case(const NetworkCase& c) {
    ValidationReport rep;
    auto flag = [&](const std::string& where, const std::string& msg) {
        rep.violations.push_back({where, msg});
    };

    int slack_count = 0;
    for (const auto& b : c.buses) {
        std::string where = "bus " + std::to_string(b.id);
        if (b.kind == BusKind::Slack) ++slack_count;
        if (b.kind != BusKind::Pq && b.v_set <= 0.0) flag(where, "v_set must be positive");
    }
    if (slack_count != 1)
        flag("buses", "exactly one slack bus required, found " + std::to_string(slack_count));

    for (std::size_t i = 0; i < c.branches.size(); ++i) {
        const auto& br = c.branches[i];
        std::string where = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
        if (br.from == br.to) flag(where, "endpoints must differ");
        if (br.r == 0.0 && br.x == 0.0) flag(where, "r = x = 0 has no admittance");
        if (br.tap < 0.0) flag(where, "negative tap ratio");
    }

    for (std::size_t i = 0; i < c.machines.size(); ++i) {
        const auto& m = c.machines[i];
        std::string where = "machine " + std::to_string(i + 1);
        if (m.x_ls < 0.0) flag(where, "x_ls must be non-negative");
        if (!(m.x_d > m.x_d_p && m.x_d_p > m.x_d_pp && m.x_d_pp > m.x_ls))
            flag(where, "need x_d > x_d_p > x_d_pp > x_ls");
        if (!(m.x_q > m.x_q_p && m.x_q_p > m.x_q_pp && m.x_q_pp > m.x_ls))
            flag(where, "need x_q > x_q_p > x_q_pp > x_ls");
        if (m.t_do_p <= 0 || m.t_do_pp <= 0 || m.t_qo_p <= 0 || m.t_qo_pp <= 0)
            flag(where, "time constants must be positive");
        if (m.h <= 0) flag(where, "inertia must be positive");
        if (m.r_s < 0) flag(where, "negative stator resistance");
    }

    std::vector<int> exciter_count(c.machines.size(), 0), turbine_count(c.machines.size(), 0);
    for (std::size_t i = 0; i < c.exciters.size(); ++i) {
        const auto& e = c.exciters[i];
        std::string where = "exciter " + std::to_string(i + 1);
        if (e.machine >= 1 && e.machine <= static_cast<int>(c.machines.size()))
            ++exciter_count[e.machine - 1];
        if (e.k_a <= 0) flag(where, "k_a must be positive");
        if (e.t_a <= 0 || e.t_e <= 0 || e.t_f <= 0) flag(where, "time constants must be positive");
        if (e.sat_a < 0) flag(where, "sat_a must be non-negative");
        if (e.vr_max && e.vr_min && !(*e.vr_min < *e.vr_max))
            flag(where, "vr_min must be below vr_max");
    }
    for (std::size_t i = 0; i < c.turbines.size(); ++i) {
        const auto& t = c.turbines[i];
        std::string where = "turbine " + std::to_string(i + 1);
        if (t.machine >= 1 && t.machine <= static_cast<int>(c.machines.size()))
            ++turbine_count[t.machine - 1];
        if (t.t_ch <= 0 || t.t_sv <= 0) flag(where, "time constants must be positive");
        if (t.r_d <= 0) flag(where, "droop must be positive");
    }
    for (std::size_t i = 0; i < c.machines.size(); ++i) {
        std::string where = "machine " + std::to_string(i + 1);
        if (exciter_count[i] != 1) flag(where, "needs exactly one exciter");
        if (turbine_count[i] != 1) flag(where, "needs exactly one turbine");
    }

    for (std::size_t i = 0; i < c.res_plants.size(); ++i) {
        const auto& r = c.res_plants[i];
        std::string where = "res plant " + std::to_string(i + 1);
        if (!(r.t_g > 0.0 && r.t_g <= 1.0)) flag(where, "t_g must be in (0, 1]");
        if (r.k_p < 0 || r.k_i < 0) flag(where, "PI gains must be non-negative");
        if (r.ip_max && *r.ip_max <= 0) flag(where, "ip_max must be positive");
        if (r.iq_max && r.iq_min && !(*r.iq_min <= *r.iq_max))
            flag(where, "iq_min must not exceed iq_max");
        if (r.v_freeze < 0) flag(where, "v_freeze must be non-negative");
    }

    // Scheduled generation must have a dynamic counterpart once any device exists.
    if (c.has_devices()) {
        std::set<int> device_buses;
        for (const auto& m : c.machines) device_buses.insert(m.bus);
        for (const auto& r : c.res_plants) device_buses.insert(r.bus);
        for (const auto& b : c.buses) {
            if (b.kind != BusKind::Pq && !device_buses.count(b.id))
                flag("bus " + std::to_string(b.id),
                     "slack/pv bus carries no machine or RES plant");
        }
    }

    const ScenarioConfig& sc = c.scenario;
    if (sc.base_mva <= 0) flag("scenario", "base_mva must be positive");
    if (sc.freq_hz <= 0) flag("scenario", "freq_hz must be positive");
    if (sc.dt <= 0) flag("scenario", "dt must be positive");
    if (sc.t_end <= 0) flag("scenario", "t_end must be positive");
    if (sc.zeta_threshold <= 0) flag("scenario", "zeta_threshold must be positive");
    if (sc.fault_bus) {
        if (c.bus_index(*sc.fault_bus) < 0)
            flag("scenario", "fault_bus " + std::to_string(*sc.fault_bus) + " does not exist");
        if (!(0.0 <= sc.t_f1 && sc.t_f1 < sc.t_f2 && sc.t_f2 <= sc.t_end))
            flag("scenario", "need 0 <= t_f1 < t_f2 <= t_end");
        if (sc.fault_admittance <= 0) flag("scenario", "fault_admittance must be positive");
    }

    // Connectivity over in-service branches.
    if (!c.buses.empty()) {
        std::vector<std::vector<int>> adj(c.buses.size());
        for (const auto& br : c.branches) {
            if (!br.in_service) continue;
            int f = c.bus_index(br.from), t = c.bus_index(br.to);
            if (f >= 0 && t >= 0) {
                adj[f].push_back(t);
                adj[t].push_back(f);
            }
        }
        std::vector<bool> seen(c.buses.size(), false);
        std::vector<int> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (!seen[w]) {
                    seen[w] = true;
                    stack.push_back(w);
                }
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i])
                flag("bus " + std::to_string(c.buses[i].id), "not connected to the network");
    }

    return rep;
}

}  // namespace gridwave
