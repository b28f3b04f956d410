#include "lipfield/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "lipfield/benchmark.hpp"
#include "lipfield/errors.hpp"

#ifndef LIPFIELD_VERSION
#define LIPFIELD_VERSION "unknown"
#endif

namespace lipfield::cli {

namespace {

Component parse_component(const std::string& s, const std::string& key) {
    if (s == "x") return Component::x;
    if (s == "y") return Component::y;
    if (s == "xy") return Component::xy;
    throw ConfigError("key '" + key + "': component must be x, y or xy, got '" + s + "'");
}

RigidParam parse_rigid_param(const std::string& s) {
    if (s == "free") return RigidParam::unknown();
    if (s == "load") return RigidParam::loaded(1.0);
    if (s.rfind("load:", 0) == 0) return RigidParam::loaded(parse_double(s.substr(5), "rigid"));
    return RigidParam::fixed(parse_double(s, "rigid"));
}

std::vector<std::string> words_of(const std::string& value, const std::string& key, std::size_t min,
                                  std::size_t max) {
    std::vector<std::string> w = split_words(value);
    if (w.size() < min || w.size() > max)
        throw ConfigError("key '" + key + "': expected " + std::to_string(min) +
                          (min == max ? "" : " to " + std::to_string(max)) + " fields, got '" + value + "'");
    return w;
}

MaterialParams material_from(const KeyValueConfig& cfg) {
    MaterialParams m;
    m.E = cfg.get_double("E");
    m.nu = cfg.get_double("nu");
    m.Yc = cfg.get_double("Yc");
    m.l = cfg.get_double("l");
    m.eta = cfg.get_double("eta");
    m.beta = cfg.get_double("beta", m.beta);
    m.k_res = cfg.get_double("k_res", m.k_res);
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("material: ") + e.what());
    }
    return m;
}

std::vector<Point2> point_list(const KeyValueConfig& cfg, const std::string& key) {
    const std::vector<double> v = cfg.get_doubles(key);
    if (v.size() < 4 || v.size() % 2 != 0)
        throw ConfigError("key '" + key + "': expected at least two x y pairs");
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < v.size(); i += 2) pts.push_back({v[i], v[i + 1]});
    return pts;
}

std::string default_out_dir(const std::filesystem::path& config) { return config.stem().string(); }

// Exit code and one-line diagnosis for an exception escaping a command.
int report(std::ostream& err, const char* command) {
    try {
        throw;
    } catch (const ConfigError& e) {
        err << "lipfield " << command << ": config error: " << e.what() << '\n';
        return exit_config;
    } catch (const MeshError& e) {
        err << "lipfield " << command << ": mesh error: " << e.what() << '\n';
        return exit_config;
    } catch (const ConstraintError& e) {
        err << "lipfield " << command << ": boundary condition error: " << e.what() << '\n';
        return exit_config;
    } catch (const OutputError& e) {
        err << "lipfield " << command << ": output error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "lipfield " << command << ": invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const std::out_of_range& e) {
        err << "lipfield " << command << ": invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const SolverError& e) {
        err << "lipfield " << command << ": solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        err << "lipfield " << command << ": failure: " << e.what() << '\n';
        return exit_solver;
    }
}

std::string step_name(int step, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "step_%04d_%s.vtk", step, suffix);
    return buf;
}

}  // namespace

std::filesystem::path resolve_output_dir(const std::string& configured) {
    const std::filesystem::path p(configured);
    if (p.is_absolute()) return p;
    const char* root = std::getenv("LIPFIELD_OUT");
    if (root != nullptr && *root != '\0') return std::filesystem::path(root) / p;
    return p;
}

BoundarySpec boundary_spec(const KeyValueConfig& cfg) {
    BoundarySpec b;
    for (const std::string& v : cfg.get_all("fix")) {
        const auto w = words_of(v, "fix", 2, 3);
        b.fix.push_back({w[0], parse_component(w[1], "fix"), w.size() > 2 ? parse_double(w[2], "fix") : 0.0});
    }
    for (const std::string& v : cfg.get_all("load")) {
        const auto w = words_of(v, "load", 2, 3);
        const Component c = parse_component(w[1], "load");
        b.load.push_back({w[0], c, w.size() > 2 ? parse_double(w[2], "load") : 1.0});
    }
    for (const std::string& v : cfg.get_all("pin")) {
        const auto w = words_of(v, "pin", 3, 3);
        b.pin.push_back({{parse_double(w[0], "pin"), parse_double(w[1], "pin")}, parse_component(w[2], "pin")});
    }
    for (const std::string& v : cfg.get_all("rigid")) {
        const auto w = words_of(v, "rigid", 4, 6);
        if (w.size() == 5) throw ConfigError("key 'rigid': the centre needs both coordinates");
        RigidSpec r;
        r.tag = w[0];
        for (int k = 0; k < 3; ++k) r.params[k] = parse_rigid_param(w[1 + k]);
        if (w.size() == 6) r.center = Point2{parse_double(w[4], "rigid"), parse_double(w[5], "rigid")};
        b.rigid.push_back(std::move(r));
    }
    return b;
}

SimulationConfig simulation_config(const KeyValueConfig& cfg) {
    SimulationConfig sc;
    sc.mesh = cfg.resolve_path(cfg.get_string("mesh"));
    sc.material = material_from(cfg);
    sc.boundary = boundary_spec(cfg);
    if (sc.boundary.load.empty() &&
        std::none_of(sc.boundary.rigid.begin(), sc.boundary.rigid.end(), [](const RigidSpec& r) {
            return std::any_of(r.params.begin(), r.params.end(),
                               [](const RigidParam& p) { return p.kind == RigidParam::Kind::loaded; });
        }))
        throw ConfigError("no loaded boundary: add a 'load' or a loaded 'rigid' entry");
    if (cfg.has("loads")) {
        if (cfg.has("load_steps") || cfg.has("u_max"))
            throw ConfigError("key 'loads' excludes 'load_steps' and 'u_max'");
        sc.loads = cfg.get_doubles("loads");
    } else {
        const int steps = cfg.get_int("load_steps");
        if (steps < 0) throw ConfigError("key 'load_steps' must be non-negative");
        sc.loads = uniform_loads(cfg.get_double("u_max"), steps);
    }
    if (cfg.has("reaction")) {
        const auto w = words_of(cfg.get_string("reaction"), "reaction", 2, 2);
        sc.reaction_tag = w[0];
        sc.reaction_comp = parse_component(w[1], "reaction");
        if (sc.reaction_comp == Component::xy) throw ConfigError("key 'reaction': component must be x or y");
    }
    if (cfg.has("crack_path")) sc.crack_path = point_list(cfg, "crack_path");
    sc.crack_threshold = cfg.get_double("crack_threshold", sc.crack_threshold);
    sc.tol_d = cfg.get_double("tol_d", sc.tol_d);
    sc.tol_F = cfg.get_double("tol_F", sc.tol_F);
    sc.max_stagger = cfg.get_int("max_stagger", sc.max_stagger);
    sc.output_every = cfg.get_int("output_every", sc.output_every);
    sc.validate = cfg.get_bool("validate", false);
    sc.damage.patching = cfg.get_bool("patching", true);
    try {
        sc.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sc;
}

RunManifest::RunManifest(std::string command, const KeyValueConfig& cfg)
    : command_(std::move(command)), config_(cfg.entries()) {}

void RunManifest::set_status(std::string status, std::string message) {
    status_ = std::move(status);
    message_ = std::move(message);
}

void RunManifest::write(const std::filesystem::path& dir) const {
    nlohmann::ordered_json j;
    j["tool"] = "lipfield";
    j["version"] = LIPFIELD_VERSION;
    j["command"] = command_;
    j["status"] = status_;
    if (!message_.empty()) j["message"] = message_;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::array();
    for (const auto& [k, v] : config_) cfg.push_back({{"key", k}, {"value", v}});
    j["config"] = cfg;
    nlohmann::ordered_json phases = nlohmann::ordered_json::object();
    for (const auto& [name, sec] : phases_) phases[name] = sec;
    j["wall_seconds"] = phases;
    j["files"] = files_;
    const std::filesystem::path path = dir / "manifest.json";
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw OutputError("cannot write " + path.string());
}

double PhaseTimer::lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
}

int cmd_run(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
    std::optional<RunManifest> manifest;
    std::filesystem::path dir;
    PhaseTimer timer;
    try {
        const KeyValueConfig cfg = KeyValueConfig::load(config);
        cfg.reject_unknown({"mesh", "E", "nu", "Yc", "l", "eta", "beta", "k_res", "load_steps", "u_max", "loads",
                            "fix", "load", "pin", "rigid", "reaction", "crack_path", "crack_threshold", "tol_d",
                            "tol_F", "max_stagger", "output_every", "patching", "out_dir", "validate"});
        SimulationConfig sc = simulation_config(cfg);
        dir = resolve_output_dir(cfg.get_string("out_dir", default_out_dir(config)));
        sc.out_dir = dir;
        FeMesh mesh = read_mesh(sc.mesh);
        Simulation sim(std::move(mesh), sc);
        ensure_directory(dir);
        manifest.emplace("run", cfg);
        manifest->add_phase("setup", timer.lap());
        out << "mesh " << sim.mesh().num_elements() << " elements, Lip-mesh " << sim.lip().num_triangles()
            << " triangles; " << sc.loads.size() << " load steps\n";

        CsvWriter curve(dir / "curve.csv", {"step [-]", "load [mm]", "reaction [N/mm]", "iterations [-]",
                                            "free_energy [N*mm/mm]", "dissipated [N*mm/mm]", "crack_length [mm]",
                                            "d_min [-]", "d_max [-]"});
        manifest->add_file("curve.csv");
        CsvWriter history(dir / "staggered.csv", {"step [-]", "half_step [-]", "potential [N*mm/mm]"});
        manifest->add_file("staggered.csv");
        double output_seconds = 0.0;
        const int total = static_cast<int>(sc.loads.size());
        auto observer = [&](const Simulation& s, const StepRecord& r) {
            PhaseTimer io_timer;
            curve.row({static_cast<double>(r.step), r.load, r.reaction, static_cast<double>(r.iterations),
                       r.free_energy, r.dissipated, r.crack_length, r.d_min, r.d_max});
            curve.flush();
            for (std::size_t k = 0; k < r.potential_history.size(); ++k)
                history.row({static_cast<double>(r.step), static_cast<double>(k), r.potential_history[k]});
            history.flush();
            if (r.step % sc.output_every == 0 || r.step == total) {
                const std::string fe = step_name(r.step, "fe"), lip = step_name(r.step, "lip");
                write_vtk_fe(dir / fe, s.mesh(), s.displacement(), s.damage());
                write_vtk_lip(dir / lip, s.lip(), s.damage());
                manifest->add_file(fe);
                manifest->add_file(lip);
            }
            out << "step " << r.step << " load " << r.load << " reaction " << r.reaction << " iterations "
                << r.iterations << " d_max " << r.d_max << '\n';
            output_seconds += io_timer.lap();
        };
        try {
            run_simulation(sim, observer);
        } catch (...) {
            manifest->add_phase("solve", timer.lap() - output_seconds);
            manifest->add_phase("output", output_seconds);
            throw;
        }
        manifest->add_phase("solve", timer.lap() - output_seconds);
        manifest->add_phase("output", output_seconds);

        if (sc.validate) {
            CsvWriter v(dir / "validation.csv",
                        {"step [-]", "iteration [-]", "bounds_gap [-]", "patch_gap [-]"});
            double bg = 0.0, pg = 0.0;
            for (const ValidationReport& r : sim.validation()) {
                v.row({static_cast<double>(r.step), static_cast<double>(r.iteration), r.bounds_gap, r.patch_gap});
                bg = std::max(bg, r.bounds_gap);
                pg = std::max(pg, r.patch_gap);
            }
            manifest->add_file("validation.csv");
            out << "validation: " << sim.validation().size() << " damage updates, max bounds gap " << bg
                << ", max patched vs unpatched gap " << pg << '\n';
        }
        manifest->set_status("ok");
        manifest->write(dir);
        return exit_ok;
    } catch (...) {
        const int code = report(err, "run");
        if (manifest) {
            try {
                std::string what;
                try {
                    throw;
                } catch (const std::exception& e) {
                    what = e.what();
                }
                manifest->set_status("failed", what);
                manifest->write(dir);
            } catch (...) {
            }
        }
        return code;
    }
}

int cmd_project(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
    try {
        PhaseTimer timer;
        const KeyValueConfig cfg = KeyValueConfig::load(config);
        cfg.reject_unknown({"L", "l", "l_bar", "resolutions", "out_dir"});
        const double L = cfg.get_double("L", 1.0);
        const double l = cfg.get_double("l");
        const double l_bar = cfg.get_double("l_bar");
        if (!(L > 0.0 && l > 0.0 && l_bar > 0.0)) throw ConfigError("L, l and l_bar must be positive");
        std::vector<int> cells;
        for (double r : cfg.get_doubles("resolutions")) {
            if (r != std::floor(r) || r < 2 || static_cast<int>(r) % 2 != 0)
                throw ConfigError("key 'resolutions': L/h values must be even integers >= 2");
            cells.push_back(static_cast<int>(r));
        }
        const std::filesystem::path dir = resolve_output_dir(cfg.get_string("out_dir", default_out_dir(config)));
        ensure_directory(dir);
        RunManifest manifest("project", cfg);
        manifest.add_phase("setup", timer.lap());
        if (l_bar >= l)
            out << "degenerate benchmark: l_bar >= l, the input is already 1/l-Lipschitz and is its own projection\n";

        const double peak_exact = cone_projection_exact(0.0, l, l_bar);
        CsvWriter csv(dir / "projection.csv", {"L_over_h [-]", "h_over_L [-]", "h [mm]", "error_L2_rel [-]",
                                               "peak [-]", "peak_exact [-]", "degenerate [-]"});
        manifest.add_file("projection.csv");
        double solve_seconds = 0.0;
        for (int n : cells) {
            const ProjectionCase pc = projection_benchmark(L, n, l, l_bar);
            solve_seconds += timer.lap();
            csv.row({static_cast<double>(n), 1.0 / n, pc.h, pc.error, pc.peak, peak_exact, pc.degenerate ? 1.0 : 0.0});
            std::vector<double> exact(pc.input.size());
            for (std::size_t v = 0; v < exact.size(); ++v)
                exact[v] = cone_projection_exact(norm(pc.mesh.vertices()[v]), l, l_bar);
            const std::string name = "projection_" + std::to_string(n) + ".vtk";
            write_vtk_lip(dir / name, pc.mesh,
                          {{"input", pc.input}, {"projected", pc.projected}, {"exact", exact}});
            manifest.add_file(name);
            out << "L/h " << n << " error " << pc.error << " peak " << pc.peak << " (exact " << peak_exact << ")\n";
        }
        manifest.add_phase("solve", solve_seconds);
        manifest.add_phase("output", timer.lap());
        manifest.set_status("ok");
        manifest.write(dir);
        return exit_ok;
    } catch (...) {
        return report(err, "project");
    }
}

int cmd_griffith(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
    try {
        PhaseTimer timer;
        const KeyValueConfig cfg = KeyValueConfig::load(config);
        cfg.reject_unknown({"mesh", "E", "nu", "K_Ic", "Gc", "crack_upper", "crack_lower", "crack_origin",
                            "initial_crack", "fix", "load", "pin", "rigid", "reaction", "out_dir"});
        MaterialParams mat;
        mat.E = cfg.get_double("E");
        mat.nu = cfg.get_double("nu");
        try {
            mat.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("material: ") + e.what());
        }
        if (cfg.has("K_Ic") == cfg.has("Gc")) throw ConfigError("exactly one of 'K_Ic' and 'Gc' is required");
        const double Gc = cfg.has("Gc") ? cfg.get_double("Gc") : griffith_gc_from_kic(mat.E, mat.nu, cfg.get_double("K_Ic"));
        if (!(Gc > 0.0)) throw ConfigError("the critical energy release rate must be positive");

        const FeMesh mesh = read_mesh(cfg.resolve_path(cfg.get_string("mesh")));
        const std::vector<double> origin = cfg.get_doubles("crack_origin");
        if (origin.size() != 2) throw ConfigError("key 'crack_origin': expected 'x y'");
        const double a0 = cfg.get_double("initial_crack", 0.0);
        const CrackPath path = make_crack_path(mesh, mesh.resolve_tag(cfg.get_string("crack_upper")),
                                               mesh.resolve_tag(cfg.get_string("crack_lower")),
                                               {origin[0], origin[1]}, a0);
        const auto rw = words_of(cfg.get_string("reaction"), "reaction", 2, 2);
        const Component rc = parse_component(rw[1], "reaction");
        if (rc == Component::xy) throw ConfigError("key 'reaction': component must be x or y");
        GriffithHarness harness(mesh, mat, build_constraints(mesh, boundary_spec(cfg)), path,
                                mesh.nodes_with_tag(mesh.resolve_tag(rw[0])), rc == Component::y ? 1 : 0);

        const std::filesystem::path dir = resolve_output_dir(cfg.get_string("out_dir", default_out_dir(config)));
        ensure_directory(dir);
        RunManifest manifest("griffith", cfg);
        manifest.add_phase("setup", timer.lap());
        const std::vector<GriffithRow> rows = harness.critical_curves(Gc);
        manifest.add_phase("solve", timer.lap());
        CsvWriter csv(dir / "griffith.csv", {"a [mm]", "G1 [N/mm]", "u_c [mm]", "F_c [N/mm]"});
        for (const GriffithRow& r : rows) csv.row({r.a, r.G1, r.u_c, r.F_c});
        manifest.add_file("griffith.csv");
        manifest.add_phase("output", timer.lap());
        out << "Gc " << Gc << " N/mm, " << harness.num_pairs() << " tied pairs at spacing " << harness.spacing()
            << " mm, " << rows.size() << " crack lengths\n";
        manifest.set_status("ok");
        manifest.write(dir);
        return exit_ok;
    } catch (...) {
        return report(err, "griffith");
    }
}

int cmd_mesh_info(const std::filesystem::path& mesh_path, std::ostream& out, std::ostream& err) {
    try {
        const FeMesh mesh = read_mesh(mesh_path);
        const auto [amin, amax] = std::minmax_element(mesh.areas().begin(), mesh.areas().end());
        int holes = 0;
        for (const BoundaryLoop& loop : mesh.boundary_loops()) holes += loop.is_hole ? 1 : 0;
        std::map<int, int> edges_per_tag;
        for (const TaggedEdge& e : mesh.boundary_edges()) ++edges_per_tag[e.tag];
        const LipMesh lip = build_lip_mesh(mesh);

        out << "nodes " << mesh.num_nodes() << '\n';
        out << "elements " << mesh.num_elements() << '\n';
        out << "area " << format_number(mesh.total_area()) << " mm^2\n";
        out << "element_area_min " << format_number(*amin) << " mm^2\n";
        out << "element_area_max " << format_number(*amax) << " mm^2\n";
        out << "boundary_loops " << mesh.boundary_loops().size() << " (holes " << holes << ")\n";
        for (const auto& [tag, count] : edges_per_tag) {
            const auto it = mesh.physical_names().find(tag);
            out << "tag " << tag << ' ' << (it != mesh.physical_names().end() ? it->second : "-") << " edges " << count
                << '\n';
        }
        out << "lip_vertices " << lip.num_vertices() << '\n';
        out << "lip_triangles " << lip.num_triangles() << '\n';
        return exit_ok;
    } catch (...) {
        return report(err, "mesh-info");
    }
}

int main(int argc, char** argv) {
    CLI::App app{"Lipschitz-regularized damage simulations"};
    app.set_version_flag("--version", LIPFIELD_VERSION);
    app.require_subcommand(1);
    std::string path;
    auto* run = app.add_subcommand("run", "quasi-static simulation from a config file");
    run->add_option("config", path, "config file")->required();
    auto* project = app.add_subcommand("project", "Lipschitz projection benchmark");
    project->add_option("config", path, "config file")->required();
    auto* griffith = app.add_subcommand("griffith", "node-release energy release rate analysis");
    griffith->add_option("config", path, "config file")->required();
    auto* info = app.add_subcommand("mesh-info", "summary of an MSH 2.2 mesh");
    info->add_option("mesh", path, "mesh file")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }
    if (run->parsed()) return cmd_run(path, std::cout, std::cerr);
    if (project->parsed()) return cmd_project(path, std::cout, std::cerr);
    if (griffith->parsed()) return cmd_griffith(path, std::cout, std::cerr);
    return cmd_mesh_info(path, std::cout, std::cerr);
}

}  // namespace lipfield::cli
