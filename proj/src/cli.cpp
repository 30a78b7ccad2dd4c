#include "gridwave/cli.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridwave/case_io.hpp"
#include "gridwave/csv.hpp"
#include "gridwave/errors.hpp"
#include "gridwave/freqresp.hpp"
#include "gridwave/network.hpp"
#include "gridwave/powerflow.hpp"
#include "gridwave/simulate.hpp"
#include "gridwave/smallsignal.hpp"
#include "gridwave/svgplot.hpp"

namespace gridwave {

namespace fs = std::filesystem;

namespace {

NetworkCase load_valid_case(const std::string& dir) {
    NetworkCase c = load_case(dir);
    const ValidationReport rep = validate_case(c);
    if (!rep.ok()) {
        std::string msg = "case '" + dir + "' fails validation";
        for (const auto& v : rep.violations) msg += "\n  " + v.where + ": " + v.message;
        throw Error(ErrorCode::InvalidCase, msg);
    }
    return c;
}

std::vector<double> column(const Eigen::MatrixXd& m, int j) {
    std::vector<double> out(m.rows());
    for (int i = 0; i < m.rows(); ++i) out[i] = m(i, j);
    return out;
}

void write_solution(const NetworkCase& c, const PowerFlowSolution& pf, const fs::path& out) {
    csv::Writer w(out / "solution.csv");
    w.field("bus").field("v_mag").field("theta_deg").field("p_inj").field("q_inj").end_row();
    for (size_t i = 0; i < c.buses.size(); ++i) {
        w.field(c.buses[i].id)
            .field(pf.v_mag[i])
            .field(pf.v_ang[i] * 180.0 / M_PI)
            .field(pf.p_inj[i])
            .field(pf.q_inj[i])
            .end_row();
    }
    w.close();
}

void write_simulation(const SimulationResult& res, const fs::path& out, bool svg) {
    {
        csv::Writer w(out / "states.csv");
        w.field("t");
        for (const auto& l : res.state_labels) w.field(l);
        w.end_row();
        for (size_t i = 0; i < res.t.size(); ++i) {
            w.field(res.t[i]);
            for (int j = 0; j < res.states.cols(); ++j) w.field(res.states(i, j));
            w.end_row();
        }
        w.close();
    }
    {
        csv::Writer w(out / "bus_voltages.csv");
        w.field("t");
        for (int id : res.bus_ids) w.field("bus" + std::to_string(id));
        w.end_row();
        for (size_t i = 0; i < res.t.size(); ++i) {
            w.field(res.t[i]);
            for (int j = 0; j < res.bus_v_mag.cols(); ++j) w.field(res.bus_v_mag(i, j));
            w.end_row();
        }
        w.close();
    }
    {
        csv::Writer w(out / "frequencies.csv");
        w.field("t");
        for (const auto& l : res.freq_labels) w.field(l);
        w.end_row();
        for (size_t i = 0; i < res.t.size(); ++i) {
            w.field(res.t[i]);
            for (int j = 0; j < res.bus_freq.cols(); ++j) w.field(res.bus_freq(i, j));
            w.end_row();
        }
        w.close();
    }
    {
        csv::Writer w(out / "events.csv");
        w.field("t").field("event").end_row();
        for (const auto& e : res.events) w.field(e.t).field(e.what).end_row();
        w.close();
    }

    if (!svg) return;
    svg::PlotSpec fp;
    fp.title = "Machine electrical frequencies";
    fp.x_label = "t, s";
    fp.y_label = "f, Hz";
    for (size_t k = 0; k < res.freq_labels.size(); ++k)
        fp.series.push_back({res.freq_labels[k], res.t, column(res.bus_freq, k), false});
    svg::write_plot(out / "frequencies.svg", fp);

    svg::PlotSpec vp;
    vp.title = "Bus voltage magnitudes";
    vp.x_label = "t, s";
    vp.y_label = "|V|, pu";
    for (size_t j = 0; j < res.bus_ids.size(); ++j)
        vp.series.push_back({"", res.t, column(res.bus_v_mag, j), false});
    svg::write_plot(out / "bus_voltages.svg", vp);
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m, const std::string& row_axis,
                  const std::vector<std::string>& col_labels,
                  const std::vector<std::string>& row_labels) {
    csv::Writer w(path);
    w.field(row_axis);
    for (const auto& l : col_labels) w.field(l);
    w.end_row();
    for (int i = 0; i < m.rows(); ++i) {
        w.field(row_labels[i]);
        for (int j = 0; j < m.cols(); ++j) w.field(m(i, j));
        w.end_row();
    }
    w.close();
}

void write_linear_model(const LinearModel& lm, const fs::path& out) {
    write_matrix(out / "a.csv", lm.a, "state", lm.state_labels, lm.state_labels);
    write_matrix(out / "b.csv", lm.b, "state", lm.input_labels, lm.state_labels);
    write_matrix(out / "c.csv", lm.c, "output", lm.state_labels, lm.output_labels);
    write_matrix(out / "d.csv", lm.d, "output", lm.input_labels, lm.output_labels);
}

void write_modes(const ModalAnalysis& ma, const fs::path& out) {
    csv::Writer w(out / "modes.csv");
    w.field("re").field("im").field("freq_hz").field("damping_pct").end_row();
    for (const auto& m : ma.modes) {
        w.field(m.lambda.real())
            .field(m.lambda.imag())
            .field(m.freq_hz)
            .field(m.damping_pct)
            .end_row();
    }
    w.close();
}

void write_mode_shapes(const ModalAnalysis& ma, double zeta_pct, const std::string& filter,
                       const fs::path& out) {
    csv::Writer w(out / "mode_shapes.csv");
    w.field("mode").field("label").field("magnitude").field("angle_deg").end_row();
    for (size_t i = 0; i < ma.modes.size(); ++i) {
        const auto& m = ma.modes[i];
        if (m.lambda.imag() <= 1e-9 || m.damping_pct >= zeta_pct) continue;
        for (const auto& e : mode_shape(ma, static_cast<int>(i), filter)) {
            w.field(static_cast<int>(i))
                .field(e.label)
                .field(e.magnitude)
                .field(e.angle_deg)
                .end_row();
        }
    }
    w.close();
}

void write_participation(const ModalAnalysis& ma, const fs::path& out) {
    const Eigen::MatrixXd p = participation_matrix(ma);
    std::vector<std::string> mode_labels;
    for (size_t i = 0; i < ma.modes.size(); ++i)
        mode_labels.push_back("mode" + std::to_string(i));
    write_matrix(out / "participation.csv", p, "state", mode_labels, ma.state_labels);
    write_matrix(out / "participation_normalized.csv", normalize_participation(p), "state",
                 mode_labels, ma.state_labels);
}

void write_residues(const std::vector<Residue>& rs, const fs::path& out) {
    csv::Writer w(out / "residues.csv");
    w.field("mode").field("input").field("output").field("ctrl_mag").field("obs_mag")
        .field("res_mag").field("res_phase_deg").end_row();
    for (const auto& r : rs) {
        w.field(r.mode)
            .field(r.input)
            .field(r.output)
            .field(r.ctrl_mag)
            .field(r.obs_mag)
            .field(std::abs(r.value))
            .field(std::arg(r.value) * 180.0 / M_PI)
            .end_row();
    }
    w.close();
}

void dump_admittance(const Eigen::MatrixXcd& y, const fs::path& path) {
    csv::Writer w(path);
    w.field("row").field("col").field("real").field("imag").end_row();
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j) {
            if (y(i, j) == std::complex<double>(0.0, 0.0)) continue;
            w.field(i).field(j).field(y(i, j).real()).field(y(i, j).imag()).end_row();
        }
    w.close();
}

std::string iso_utc_now() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// FNV-1a over file names and contents, names sorted for stability.
std::string case_checksum(const fs::path& dir) {
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](const char* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 1099511628211ULL;
        }
    };
    std::vector<fs::path> files;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const std::string name = f.filename().string();
        mix(name.data(), name.size());
        std::ifstream in(f, std::ios::binary);
        char buf[4096];
        while (in.read(buf, sizeof buf) || in.gcount() > 0) {
            mix(buf, static_cast<std::size_t>(in.gcount()));
            if (!in) break;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

struct CommonArgs {
    std::string case_dir;
    std::string out_dir;
};

fs::path ensure_out(const CommonArgs& args) {
    fs::path out(args.out_dir);
    fs::create_directories(out);
    return out;
}

int cmd_validate(const std::string& case_dir) {
    const NetworkCase c = load_case(case_dir);
    const ValidationReport rep = validate_case(c);
    if (rep.ok()) {
        std::cout << "case '" << c.name << "' is valid: " << c.buses.size() << " buses, "
                  << c.branches.size() << " branches, " << c.machines.size() << " machines, "
                  << c.res_plants.size() << " RES plants\n";
        return 0;
    }
    for (const auto& v : rep.violations)
        std::cout << v.where << ": " << v.message << "\n";
    std::cout << rep.violations.size() << " violation(s)\n";
    return 1;
}

int cmd_powerflow(const CommonArgs& args, const PowerFlowOptions& opt) {
    const NetworkCase c = load_valid_case(args.case_dir);
    const PowerFlowSolution pf = solve_powerflow(c, opt);
    write_solution(c, pf, ensure_out(args));
    std::cout << "power flow converged in " << pf.iterations << " iterations, max mismatch "
              << csv::format_double(pf.max_mismatch) << "\n";
    return 0;
}

int cmd_simulate(const CommonArgs& args, std::optional<double> dt, std::optional<double> t_end,
                 bool svg, bool dump_network) {
    const NetworkCase c = load_valid_case(args.case_dir);
    const PowerFlowSolution pf = solve_powerflow(c);
    const SystemModel model(c, pf);

    ScenarioConfig sc = c.scenario;
    if (dt) sc.dt = *dt;
    if (t_end) sc.t_end = *t_end;

    const SimulationResult res = run_simulation(model, sc);
    const fs::path out = ensure_out(args);
    write_simulation(res, out, svg);

    if (dump_network) {
        const AdmittanceMatrix full =
            extend_machine_nodes(absorb_loads(build_ybus(c), c, pf), c);
        dump_admittance(full.y, out / "y_full.csv");
        dump_admittance(model.networks().pre.y_red, out / "y_reduced.csv");
    }

    for (const auto& e : res.events)
        std::cout << "t=" << csv::format_double(e.t) << ": " << e.what << "\n";
    std::cout << "simulated " << res.t.size() << " points to t=" << csv::format_double(sc.t_end)
              << "\n";
    return 0;
}

LinearModel linearized_from_scenario(const NetworkCase& c, const SystemModel& model,
                                     std::optional<bool> relative_override) {
    const bool relative = relative_override.value_or(c.scenario.relative_angles);
    return linearize_system(model, c.scenario.input_selection, c.scenario.output_selection,
                            relative);
}

int cmd_linearize(const CommonArgs& args, std::optional<bool> relative) {
    const NetworkCase c = load_valid_case(args.case_dir);
    const PowerFlowSolution pf = solve_powerflow(c);
    const SystemModel model(c, pf);
    const LinearModel lm = linearized_from_scenario(c, model, relative);
    write_linear_model(lm, ensure_out(args));
    std::cout << "linearized: " << lm.a.rows() << " states, " << lm.b.cols() << " inputs, "
              << lm.c.rows() << " outputs\n";
    return 0;
}

int cmd_modes(const CommonArgs& args, std::optional<bool> relative,
              std::optional<double> zeta, const std::string& shape_filter) {
    const NetworkCase c = load_valid_case(args.case_dir);
    const PowerFlowSolution pf = solve_powerflow(c);
    const SystemModel model(c, pf);
    const LinearModel lm = linearized_from_scenario(c, model, relative);
    const ModalAnalysis ma = eigenanalysis(lm);

    const double zeta_pct = zeta.value_or(c.scenario.zeta_threshold);
    const fs::path out = ensure_out(args);
    write_modes(ma, out);
    write_mode_shapes(ma, zeta_pct, shape_filter, out);

    const auto light = lightly_damped(ma, zeta_pct);
    std::cout << ma.modes.size() << " modes, " << light.size()
              << " oscillatory below " << csv::format_double(zeta_pct) << "% damping\n";
    for (const auto& m : light)
        std::cout << "  " << csv::format_double(m.freq_hz) << " Hz at "
                  << csv::format_double(m.damping_pct) << "%\n";
    return 0;
}

int cmd_participation(const CommonArgs& args, std::optional<bool> relative) {
    const NetworkCase c = load_valid_case(args.case_dir);
    const PowerFlowSolution pf = solve_powerflow(c);
    const SystemModel model(c, pf);
    const LinearModel lm = linearized_from_scenario(c, model, relative);
    const ModalAnalysis ma = eigenanalysis(lm);
    write_participation(ma, ensure_out(args));
    std::cout << "participation factors for " << ma.modes.size() << " modes\n";
    return 0;
}

int cmd_residues(const CommonArgs& args, std::optional<bool> relative) {
    const NetworkCase c = load_valid_case(args.case_dir);
    const PowerFlowSolution pf = solve_powerflow(c);
    const SystemModel model(c, pf);
    const LinearModel lm = linearized_from_scenario(c, model, relative);
    const ModalAnalysis ma = eigenanalysis(lm);
    write_residues(residues(lm, ma), ensure_out(args));
    std::cout << "residues for " << ma.modes.size() << " modes x " << lm.b.cols()
              << " inputs x " << lm.c.rows() << " outputs\n";
    return 0;
}

int cmd_freqresp(const CommonArgs& args, std::string input, std::string output,
                 const FrequencyGrid& grid, bool svg) {
    const NetworkCase c = load_valid_case(args.case_dir);
    const PowerFlowSolution pf = solve_powerflow(c);
    const SystemModel model(c, pf);
    if (model.n_machines() == 0)
        throw Error(ErrorCode::InvalidCase, "case has no machines to form a channel");

    if (input.empty()) input = model.input_labels().back();  // synchronous-frequency channel
    if (output.empty()) output = model.device_names().front() + ".omega";

    const LinearModel lm =
        linearize_system(model, {input}, {output}, c.scenario.relative_angles);
    const FrequencyResponse fr = evaluate_response(lm, 0, 0, grid);
    const MarginReport mr = margins(lm, 0, 0, grid);
    const PoleZeroReport pz = pole_zero(lm, 0, 0);
    export_frequency_reports(fr, mr, pz, ensure_out(args), {svg});

    std::cout << "channel " << input << " -> " << output << "\n";
    if (mr.gain_margin_db)
        std::cout << "  gain margin " << csv::format_double(*mr.gain_margin_db) << " dB at "
                  << csv::format_double(*mr.omega_pc) << " rad/s\n";
    else
        std::cout << "  no phase crossover in the grid\n";
    if (mr.phase_margin_deg)
        std::cout << "  phase margin " << csv::format_double(*mr.phase_margin_deg)
                  << " deg at " << csv::format_double(*mr.omega_gc) << " rad/s\n";
    else
        std::cout << "  no gain crossover in the grid\n";
    std::cout << "  closed loop " << (mr.stable_closed_loop ? "stable" : "not stable") << "\n";
    return 0;
}

int cmd_pipeline(const CommonArgs& args, bool svg) {
    using clock = std::chrono::steady_clock;
    const fs::path out = ensure_out(args);

    nlohmann::json manifest;
    manifest["tool"] = "gridwave";
    manifest["version"] = kToolVersion;
    manifest["command"] = "pipeline";
    manifest["parameters"] = {{"case", args.case_dir}, {"out", args.out_dir}, {"svg", svg}};
    manifest["case_checksum"] = case_checksum(args.case_dir);
    manifest["started_at"] = iso_utc_now();
    manifest["stages"] = nlohmann::json::array();
    std::vector<std::string> outputs;

    std::string current;
    const auto stage = [&](const std::string& name, const std::function<std::string()>& fn) {
        current = name;
        const auto t0 = clock::now();
        const std::string note = fn();
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        manifest["stages"].push_back({{"name", name}, {"seconds", secs}, {"note", note}});
        std::cout << "[" << name << "] " << note << "\n";
    };

    try {
        std::optional<NetworkCase> c;
        std::optional<PowerFlowSolution> pf;
        std::optional<SystemModel> model;
        std::optional<LinearModel> lm;
        std::optional<ModalAnalysis> ma;

        stage("load", [&] {
            c.emplace(load_valid_case(args.case_dir));
            return std::to_string(c->buses.size()) + " buses, " +
                   std::to_string(c->machines.size()) + " machines, " +
                   std::to_string(c->res_plants.size()) + " RES plants";
        });
        stage("powerflow", [&] {
            pf.emplace(solve_powerflow(*c));
            write_solution(*c, *pf, out);
            outputs.push_back("solution.csv");
            return "converged in " + std::to_string(pf->iterations) + " iterations";
        });
        stage("flat-run", [&] {
            model.emplace(*c, *pf);
            ScenarioConfig flat = c->scenario;
            flat.fault_bus.reset();
            flat.t_f1 = flat.t_f2 = 0.0;
            flat.t_end = std::min(flat.t_end, 2.0);
            const SimulationResult res = run_simulation(*model, flat);
            double dev = 0.0;
            const Eigen::VectorXd x0 = model->initial_state();
            if (model->n_states() > 0)
                for (int i = 0; i < res.states.rows(); ++i)
                    dev = std::max(dev,
                                   (res.states.row(i).transpose() - x0).cwiseAbs().maxCoeff());
            if (dev > 1e-3)
                throw Error(ErrorCode::NotAtEquilibrium,
                            "undisturbed run drifts by " + csv::format_double(dev));
            return "max drift " + csv::format_double(dev) + " over " +
                   csv::format_double(flat.t_end) + " s";
        });
        stage("simulate", [&] {
            const SimulationResult res = run_simulation(*model, c->scenario);
            write_simulation(res, out, svg);
            outputs.insert(outputs.end(),
                           {"states.csv", "bus_voltages.csv", "frequencies.csv", "events.csv"});
            if (svg) outputs.insert(outputs.end(), {"frequencies.svg", "bus_voltages.svg"});
            return std::to_string(res.t.size()) + " points, " +
                   std::to_string(res.events.size()) + " events";
        });
        stage("linearize", [&] {
            lm.emplace(linearized_from_scenario(*c, *model, std::nullopt));
            write_linear_model(*lm, out);
            outputs.insert(outputs.end(), {"a.csv", "b.csv", "c.csv", "d.csv"});
            return std::to_string(lm->a.rows()) + " states, " + std::to_string(lm->b.cols()) +
                   " inputs, " + std::to_string(lm->c.rows()) + " outputs";
        });
        stage("modes", [&] {
            ma.emplace(eigenanalysis(*lm));
            write_modes(*ma, out);
            write_mode_shapes(*ma, c->scenario.zeta_threshold, ".omega", out);
            outputs.insert(outputs.end(), {"modes.csv", "mode_shapes.csv"});
            const auto light = lightly_damped(*ma, c->scenario.zeta_threshold);
            return std::to_string(ma->modes.size()) + " modes, " +
                   std::to_string(light.size()) + " lightly damped";
        });
        stage("participation", [&] {
            write_participation(*ma, out);
            outputs.insert(outputs.end(),
                           {"participation.csv", "participation_normalized.csv"});
            return "written";
        });
        stage("residues", [&] {
            write_residues(residues(*lm, *ma), out);
            outputs.push_back("residues.csv");
            return "written";
        });
        stage("freqresp", [&] {
            if (model->n_machines() == 0) return std::string("skipped: no machines");
            const std::string input = model->input_labels().back();
            const std::string output_label = model->device_names().front() + ".omega";
            const LinearModel ch =
                linearize_system(*model, {input}, {output_label}, c->scenario.relative_angles);
            const FrequencyResponse fr = evaluate_response(ch, 0, 0);
            const MarginReport mr = margins(ch, 0, 0);
            const PoleZeroReport pz = pole_zero(ch, 0, 0);
            export_frequency_reports(fr, mr, pz, out, {svg});
            outputs.insert(outputs.end(), {"bode.csv", "nyquist.csv", "nichols.csv",
                                           "poles_zeros.csv", "margins.csv"});
            if (svg)
                outputs.insert(outputs.end(), {"bode_mag.svg", "bode_phase.svg", "nyquist.svg",
                                               "nichols.svg", "poles_zeros.svg"});
            return "channel " + input + " -> " + output_label;
        });
    } catch (const Error& e) {
        std::cerr << "pipeline halted at stage '" << current << "': " << e.what() << "\n";
        return 1;
    }

    manifest["finished_at"] = iso_utc_now();
    manifest["outputs"] = outputs;

    // Atomic publish: the manifest only ever exists complete.
    const fs::path tmp = out / "manifest.json.tmp";
    {
        std::ofstream f(tmp);
        f << manifest.dump(2) << "\n";
        if (!f.good()) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
    fs::rename(tmp, out / "manifest.json");
    std::cout << "pipeline complete, manifest at " << (out / "manifest.json").string() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"gridwave: power-system dynamic simulation and small-signal analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("gridwave ") + kToolVersion);

    int code = 0;
    CommonArgs args;

    auto* validate = app.add_subcommand("validate", "check a case directory");
    validate->add_option("--case", args.case_dir, "case directory")->required();
    validate->callback([&] { code = cmd_validate(args.case_dir); });

    auto* powerflow = app.add_subcommand("powerflow", "solve the steady-state operating point");
    PowerFlowOptions pf_opt;
    powerflow->add_option("--case", args.case_dir, "case directory")->required();
    powerflow->add_option("--out", args.out_dir, "output directory")->required();
    powerflow->add_option("--tol", pf_opt.tol, "mismatch tolerance");
    powerflow->add_option("--max-iter", pf_opt.max_iter, "iteration cap");
    powerflow->callback([&] { code = cmd_powerflow(args, pf_opt); });

    auto* simulate = app.add_subcommand("simulate", "run the configured scenario");
    std::optional<double> sim_dt, sim_tend;
    bool sim_svg = false, sim_dump = false;
    simulate->add_option("--case", args.case_dir, "case directory")->required();
    simulate->add_option("--out", args.out_dir, "output directory")->required();
    simulate->add_option("--dt", sim_dt, "step override, s");
    simulate->add_option("--t-end", sim_tend, "horizon override, s");
    simulate->add_flag("--svg", sim_svg, "render line plots");
    simulate->add_flag("--dump-network", sim_dump, "dump full and reduced admittance matrices");
    simulate->callback([&] { code = cmd_simulate(args, sim_dt, sim_tend, sim_svg, sim_dump); });

    // Angle-reference handling for every linearization-based subcommand.
    bool rel_on = false, rel_off = false;
    const auto add_rel = [&](CLI::App* sub) {
        sub->add_flag("--relative-angles", rel_on,
                      "quotient the angle reference out (default from scenario.cfg)");
        sub->add_flag("--absolute-angles", rel_off, "keep absolute rotor angles");
    };
    const auto rel_override = [&]() -> std::optional<bool> {
        if (rel_on) return true;
        if (rel_off) return false;
        return std::nullopt;
    };

    auto* linearize = app.add_subcommand("linearize", "export the state-space model");
    linearize->add_option("--case", args.case_dir, "case directory")->required();
    linearize->add_option("--out", args.out_dir, "output directory")->required();
    add_rel(linearize);
    linearize->callback([&] { code = cmd_linearize(args, rel_override()); });

    auto* modes = app.add_subcommand("modes", "eigenvalues, damping and mode shapes");
    std::optional<double> zeta;
    std::string shape_filter = ".omega";
    modes->add_option("--case", args.case_dir, "case directory")->required();
    modes->add_option("--out", args.out_dir, "output directory")->required();
    modes->add_option("--zeta", zeta, "lightly-damped threshold, percent");
    modes->add_option("--shape-filter", shape_filter, "state label substring for mode shapes");
    add_rel(modes);
    modes->callback([&] { code = cmd_modes(args, rel_override(), zeta, shape_filter); });

    auto* participation = app.add_subcommand("participation", "participation factor tables");
    participation->add_option("--case", args.case_dir, "case directory")->required();
    participation->add_option("--out", args.out_dir, "output directory")->required();
    add_rel(participation);
    participation->callback([&] { code = cmd_participation(args, rel_override()); });

    auto* residues_cmd = app.add_subcommand("residues", "transfer-function residues");
    residues_cmd->add_option("--case", args.case_dir, "case directory")->required();
    residues_cmd->add_option("--out", args.out_dir, "output directory")->required();
    add_rel(residues_cmd);
    residues_cmd->callback([&] { code = cmd_residues(args, rel_override()); });

    auto* freqresp = app.add_subcommand("freqresp", "frequency response, margins, poles/zeros");
    std::string fr_input, fr_output;
    FrequencyGrid grid;
    bool fr_svg = false;
    freqresp->add_option("--case", args.case_dir, "case directory")->required();
    freqresp->add_option("--out", args.out_dir, "output directory")->required();
    freqresp->add_option("--input", fr_input, "input label (default omega_s)");
    freqresp->add_option("--output", fr_output, "output state label (default first omega)");
    freqresp->add_option("--wmin", grid.omega_min, "grid start, rad/s");
    freqresp->add_option("--wmax", grid.omega_max, "grid end, rad/s");
    freqresp->add_option("--points", grid.points, "grid size");
    freqresp->add_flag("--svg", fr_svg, "render plots");
    freqresp->callback([&] { code = cmd_freqresp(args, fr_input, fr_output, grid, fr_svg); });

    auto* pipeline = app.add_subcommand("pipeline", "full workflow with a run manifest");
    bool pl_svg = false;
    pipeline->add_option("--case", args.case_dir, "case directory")->required();
    pipeline->add_option("--out", args.out_dir, "output directory")->required();
    pipeline->add_flag("--svg", pl_svg, "render plots");
    pipeline->callback([&] { code = cmd_pipeline(args, pl_svg); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return code;
}

}  // namespace gridwave
