#include "calabi/cli.hpp"

#include "calabi/diskmap.hpp"
#include "calabi/echcomb.hpp"
#include "calabi/errors.hpp"
#include "calabi/map_io.hpp"
#include "calabi/orbitscan.hpp"
#include "calabi/report.hpp"
#include "calabi/suspension.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace calabi::cli {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_factor(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw ParseError("number", "empty factor");
    if (s == "pi") return std::numbers::pi;
    if (s.rfind("sqrt(", 0) == 0 && s.back() == ')') {
        const double v = parse_real(s.substr(5, s.size() - 6));
        if (v < 0.0) throw ParseError("number", "sqrt of a negative value in '" + s + "'");
        return std::sqrt(v);
    }
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const double den = parse_factor(s.substr(slash + 1));
        if (den == 0.0) throw ParseError("number", "zero denominator in '" + s + "'");
        return parse_factor(s.substr(0, slash)) / den;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError("number", "cannot read '" + s + "' as a real number");
    }
    if (used != s.size()) throw ParseError("number", "cannot read '" + s + "' as a real number");
    return v;
}

void write_text(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.output_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) throw IoError("cannot write " + cfg.output_path);
    f << text;
    if (!f) throw IoError("cannot write " + cfg.output_path);
}

void write_plot(const RunConfig& cfg, const std::string& svg) {
    std::ofstream f(cfg.plot_path, std::ios::binary);
    if (!f) throw IoError("cannot write " + cfg.plot_path);
    f << svg;
    if (!f) throw IoError("cannot write " + cfg.plot_path);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

void validate(const RunConfig& c) {
    const auto& t = c.tol;
    if (!(t.quad_tol > 0 && t.newton_tol > 0 && t.dedupe_eps > 0 && t.eps_res > 0 && t.theorem_tol > 0))
        throw PreconditionError("tolerances must be positive");
    const auto& l = c.limits;
    if (l.d_max < 1 || l.grid_n < 1 || l.k_max < 0 || l.workers < 1 || l.samples < 1)
        throw PreconditionError("limits must be positive");
}

io::MapDocument load_map(const RunConfig& c) {
    if (c.input_path.empty()) throw ParseError("input", "this command needs a map document (--input)");
    auto doc = io::parse_map_document(io::read_json_file(c.input_path));
    if (c.theta0) {
        diskmap::check_boundary_angle(doc.map, *c.theta0);
        doc.theta0 = *c.theta0;
    }
    return doc;
}

double require_theta0(const RunConfig& c) {
    if (!c.theta0) throw ParseError("--theta0", "this command needs --theta0");
    return *c.theta0;
}

std::string orbits_svg(const std::vector<orbitscan::PeriodicOrbit>& orbits) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"420\" viewBox=\"-1.05 -1.05 2.1 2.1\">\n"
       << "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.005\"/>\n"
       << "<g transform=\"scale(1,-1)\">\n";
    for (const auto& o : orbits) {
        const int hue = (o.period * 47) % 360;
        for (const auto& p : o.points)
            os << "<circle cx=\"" << fmt15(p.x()) << "\" cy=\"" << fmt15(p.y())
               << "\" r=\"0.012\" fill=\"hsl(" << hue << ",70%,45%)\"/>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

orbitscan::ScanOptions scan_options(const RunConfig& c) {
    orbitscan::ScanOptions o;
    o.d_max = c.limits.d_max;
    o.grid_n = c.limits.grid_n;
    o.newton_tol = c.tol.newton_tol;
    o.dedupe_eps = c.tol.dedupe_eps;
    o.workers = c.limits.workers;
    return o;
}

int cmd_calabi(const RunConfig& c, std::ostream& out) {
    const auto doc = load_map(c);
    diskmap::CalabiMethod m = diskmap::CalabiMethod::Auto;
    if (c.method == "polar") m = diskmap::CalabiMethod::PolarClosedForm;
    else if (c.method == "adaptive-2d") m = diskmap::CalabiMethod::Adaptive2d;
    else if (c.method != "auto") throw ParseError("--method", "expected auto, polar or adaptive-2d");
    const auto r = diskmap::calabi(doc.map, doc.theta0, c.tol.quad_tol, m);
    ordered_json j;
    j["command"] = "calabi";
    j["map_kind"] = doc.map.kind_name();
    j["theta0"] = round15(doc.theta0);
    j["calabi"] = round15(r.value);
    j["error_estimate"] = round15(r.quad_error_estimate);
    j["method"] = diskmap::to_string(r.method);
    j["collar_width"] = round15(doc.map.collar_radius());
    j["radially_symmetric"] = doc.map.radially_symmetric();
    j["quad_tol"] = round15(c.tol.quad_tol);
    write_text(c, out, dump(j));
    return kOk;
}

int cmd_orbits(const RunConfig& c, std::ostream& out) {
    const auto doc = load_map(c);
    const diskmap::ActionProfile f(doc.map, doc.theta0, c.tol.quad_tol);
    const auto res = orbitscan::scan(f, scan_options(c));
    write_text(c, out, orbitscan::orbits_csv(res.orbits));
    if (!c.plot_path.empty()) write_plot(c, orbits_svg(res.orbits));
    return kOk;
}

int cmd_check(const RunConfig& c, std::ostream& out) {
    const auto doc = load_map(c);
    const auto v = orbitscan::check_main_theorem(doc.map, doc.theta0, scan_options(c), c.tol.theorem_tol, c.tol.quad_tol);
    auto j = orbitscan::verdict_json(v);
    write_text(c, out, dump(j));
    if (!c.plot_path.empty() && v.witness) write_plot(c, orbits_svg({*v.witness}));
    return v.inconclusive ? kInconclusive : kOk;
}

int cmd_suspend(const RunConfig& c, std::ostream& out) {
    const auto doc = load_map(c);
    std::optional<suspension::SmoothingProfile> prof;
    if (c.eps_eta) prof = suspension::SmoothingProfile(*c.eps_eta);
    const auto s = suspension::build_suspension(doc.map, doc.theta0, prof, c.tol.quad_tol);
    const auto r = suspension::suspension_report(s, c.limits.samples, c.tol.quad_tol);
    auto j = suspension::report_json(s, r);
    if (c.twist_target) {
        const auto search = suspension::find_boundary_twist(doc.map, doc.theta0, *c.twist_target, c.twist_eps, 0.5, 30,
                                                            c.tol.quad_tol);
        ordered_json t;
        t["target"] = round15(*c.twist_target);
        t["eps"] = round15(c.twist_eps);
        t["deltas_tried"] = ordered_json::array();
        for (double d : search.deltas_tried) t["deltas_tried"].push_back(round15(d));
        t["result"] = search.result ? suspension::twist_json(*search.result, c.twist_eps) : ordered_json(nullptr);
        j["boundary_twist"] = t;
    }
    write_text(c, out, dump(j));
    if (!c.plot_path.empty()) write_plot(c, suspension::heatmap_svg(s));
    return kOk;
}

int cmd_nk(const RunConfig& c, std::ostream& out, bool graded) {
    const auto k_max = static_cast<std::size_t>(c.limits.k_max);
    const auto rows = graded ? echcomb::ech_spectrum_ellipsoid(c.a, c.b, k_max, c.tol.eps_res)
                             : echcomb::nk_table(c.a, c.b, k_max, c.tol.eps_res);
    write_text(c, out, echcomb::spectrum_csv(rows));
    return kOk;
}

int cmd_filtration(const RunConfig& c, std::ostream& out) {
    const double theta0 = require_theta0(c);
    const auto k_max = static_cast<std::size_t>(c.limits.k_max);
    const auto seq = echcomb::nk_sequence(1.0, theta0, k_max);
    std::ostringstream os;
    os << "k,grading,N_k,R,rank\n";
    for (std::size_t k = 0; k <= k_max; ++k)
        os << k << ',' << 2 * k << ',' << fmt15(seq[k].value) << ',' << fmt15(c.R) << ','
           << echcomb::filtered_rank(k, c.R, theta0, c.tol.eps_res) << '\n';
    write_text(c, out, os.str());
    return kOk;
}

int cmd_bounds(const RunConfig& c, std::ostream& out) {
    const double theta0 = require_theta0(c);
    if (c.k < 1) throw PreconditionError("--k must be >= 1");
    const auto k = static_cast<std::size_t>(c.k);
    ordered_json j;
    j["theta0"] = round15(theta0);
    j["V"] = round15(c.V);
    j["eps"] = round15(c.eps);
    j["k"] = k;
    double cc = 0.0;
    if (c.c) {
        cc = *c.c;
        j["c"] = round15(cc);
        j["c_source"] = "given";
    } else {
        const auto scan_k = static_cast<std::size_t>(std::max<long>(c.limits.k_max, 1));
        const auto lb = echcomb::nk_lower_bound(1.0, 1.0 / theta0, scan_k);
        cc = lb.c_witness;
        j["c"] = round15(cc);
        j["c_source"] = "scan";
        j["c_scan_k_max"] = scan_k;
    }
    j["minimal_admissible_k"] = echcomb::minimal_admissible_k(theta0, c.V, c.eps, cc);
    j["mean_action_bound"] = round15(echcomb::mean_action_bound(theta0, c.V, c.eps, k, cc));
    j["mean_action_limit"] = round15(echcomb::mean_action_limit(theta0, c.V, c.eps));
    const auto ib = echcomb::prop_input_bounds(k, theta0, c.V, c.eps, 0.0);
    j["input_bounds"] = {{"action_bound", round15(ib.action_bound)},
                         {"linking_bound", round15(ib.linking_bound)},
                         {"binding_rotation", round15(ib.rot_binding)}};
    write_text(c, out, dump(j));
    return kOk;
}

}  // namespace

double parse_real(const std::string& text) {
    double v = 1.0;
    std::size_t start = 0;
    const std::string s = trim(text);
    if (s.empty()) throw ParseError("number", "empty value");
    int depth = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i < s.size() && s[i] == '(') ++depth;
        if (i < s.size() && s[i] == ')') --depth;
        if (i == s.size() || (s[i] == '*' && depth == 0)) {
            v *= parse_factor(s.substr(start, i - start));
            start = i + 1;
        }
    }
    if (!std::isfinite(v)) throw ParseError("number", "'" + s + "' is not finite");
    return v;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        validate(config);
        switch (config.command) {
            case Command::Calabi: return cmd_calabi(config, out);
            case Command::Orbits: return cmd_orbits(config, out);
            case Command::CheckTheorem: return cmd_check(config, out);
            case Command::Suspend: return cmd_suspend(config, out);
            case Command::Nk: return cmd_nk(config, out, false);
            case Command::Spectrum: return cmd_nk(config, out, true);
            case Command::Filtration: return cmd_filtration(config, out);
            case Command::Bounds: return cmd_bounds(config, out);
        }
        return kOk;
    } catch (const ParseError& e) {
        err << "error: malformed input at " << e.what() << "\n";
        return kMalformed;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const PreconditionError& e) {
        err << "error: precondition: " << e.what() << "\n";
        return kPrecondition;
    } catch (const DomainError& e) {
        err << "error: domain: " << e.what() << "\n";
        return kPrecondition;
    } catch (const PrecisionError& e) {
        err << "error: precision: " << e.what() << "\n";
        return kPrecondition;
    } catch (const NumericError& e) {
        err << "error: numeric: " << e.what() << " (partial estimate " << fmt15(e.partial_estimate())
            << ", error estimate " << fmt15(e.error_estimate()) << ")\n";
        return kNumeric;
    } catch (const ResourceError& e) {
        err << "error: resource: " << e.what() << "\n";
        return kNumeric;
    } catch (const ConsistencyError& e) {
        err << "error: consistency: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Calabi invariants, periodic orbits, contact suspensions and ECH lattice combinatorics"};
    app.require_subcommand(1, 1);
    RunConfig cfg;
    std::string theta0_s, a_s = "1", b_s = "1", R_s = "0", V_s, eps_s, c_s, eps_eta_s, target_s;

    auto common = [&](CLI::App* s) {
        s->add_option("-o,--output", cfg.output_path, "Output file (default: stdout)");
    };
    auto map_input = [&](CLI::App* s) {
        s->add_option("input,-i,--input", cfg.input_path, "Map document (JSON)")->required();
        s->add_option("--theta0", theta0_s, "Boundary angle in turns (overrides the document)");
        s->add_option("--quad-tol", cfg.tol.quad_tol, "Absolute quadrature tolerance");
    };
    auto scan_flags = [&](CLI::App* s) {
        s->add_option("--d-max", cfg.limits.d_max, "Largest period searched");
        s->add_option("--grid-n", cfg.limits.grid_n, "Seed grid size per side");
        s->add_option("--newton-tol", cfg.tol.newton_tol, "Newton residual tolerance");
        s->add_option("--dedupe-eps", cfg.tol.dedupe_eps, "Orbit identification distance");
        s->add_option("--workers", cfg.limits.workers, "Worker threads for the seed scan");
        s->add_option("--plot", cfg.plot_path, "Write an SVG plot of the orbits");
    };

    auto* calabi = app.add_subcommand("calabi", "Calabi invariant of a map");
    map_input(calabi);
    common(calabi);
    calabi->add_option("--method", cfg.method, "auto | polar | adaptive-2d");

    auto* orbits = app.add_subcommand("orbits", "Periodic orbits with their actions (CSV)");
    map_input(orbits);
    common(orbits);
    scan_flags(orbits);

    auto* check = app.add_subcommand("check-theorem", "Compare the least mean action with the Calabi invariant");
    map_input(check);
    common(check);
    scan_flags(check);
    check->add_option("--tol", cfg.tol.theorem_tol, "Tolerance on min mean action <= calabi");

    auto* suspend = app.add_subcommand("suspend", "Contact suspension report (JSON)");
    map_input(suspend);
    common(suspend);
    suspend->add_option("--samples", cfg.limits.samples, "Quasi-random samples for the contact check");
    suspend->add_option("--eps-eta", eps_eta_s, "Smoothing profile eps (default: half of min f / max f)");
    suspend->add_option("--twist-target", target_s, "Run the boundary-twist search toward this angle");
    suspend->add_option("--twist-eps", cfg.twist_eps, "Margin for the boundary-twist search");
    suspend->add_option("--plot", cfg.plot_path, "Write an SVG heat map of F(t, r)");

    for (auto* s : {app.add_subcommand("nk", "N_k(a, b) for k = 0..k_max (CSV)"),
                    app.add_subcommand("spectrum", "ECH spectrum of the ellipsoid E(a, b) (CSV)")}) {
        s->add_option("--a", a_s, "Ellipsoid parameter a")->required();
        s->add_option("--b", b_s, "Ellipsoid parameter b")->required();
        s->add_option("--k-max", cfg.limits.k_max, "Largest index");
        s->add_option("--eps-res", cfg.tol.eps_res, "Resonance guard");
        common(s);
    }

    auto* filtration = app.add_subcommand("filtration", "Filtered ranks for the standard unknot (CSV)");
    filtration->add_option("--theta0", theta0_s, "Binding rotation parameter")->required();
    filtration->add_option("--R", R_s, "Filtration level")->required();
    filtration->add_option("--k-max", cfg.limits.k_max, "Largest index");
    filtration->add_option("--eps-res", cfg.tol.eps_res, "Resonance guard");
    common(filtration);

    auto* bounds = app.add_subcommand("bounds", "Mean action bound from the ECH inequalities (JSON)");
    bounds->add_option("--theta0", theta0_s, "Boundary angle")->required();
    bounds->add_option("--V", V_s, "Volume / Calabi invariant")->required();
    bounds->add_option("--eps", eps_s, "Margin eps")->required();
    bounds->add_option("--k", cfg.k, "ECH index k")->required();
    bounds->add_option("--c", c_s, "Lower-bound constant (default: scanned)");
    bounds->add_option("--k-max", cfg.limits.k_max, "Scan range for the constant");
    common(bounds);

    std::vector<const char*> argv{"calabi"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kMalformed;
    }

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "calabi") cfg.command = Command::Calabi;
    else if (name == "orbits") cfg.command = Command::Orbits;
    else if (name == "check-theorem") cfg.command = Command::CheckTheorem;
    else if (name == "suspend") cfg.command = Command::Suspend;
    else if (name == "nk") cfg.command = Command::Nk;
    else if (name == "spectrum") cfg.command = Command::Spectrum;
    else if (name == "filtration") cfg.command = Command::Filtration;
    else cfg.command = Command::Bounds;

    try {
        if (!theta0_s.empty()) cfg.theta0 = parse_real(theta0_s);
        cfg.a = parse_real(a_s);
        cfg.b = parse_real(b_s);
        cfg.R = parse_real(R_s);
        if (!V_s.empty()) cfg.V = parse_real(V_s);
        if (!eps_s.empty()) cfg.eps = parse_real(eps_s);
        if (!c_s.empty()) cfg.c = parse_real(c_s);
        if (!eps_eta_s.empty()) cfg.eps_eta = parse_real(eps_eta_s);
        if (!target_s.empty()) cfg.twist_target = parse_real(target_s);
    } catch (const ParseError& e) {
        err << "error: malformed input at " << e.what() << "\n";
        return kMalformed;
    }
    return run(cfg, out, err);
}

}  // namespace calabi::cli
