#include "calabi/map_io.hpp"

#include "calabi/errors.hpp"
#include "calabi/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace calabi::io {

using nlohmann::json;
using nlohmann::ordered_json;
namespace dm = calabi::diskmap;

namespace {

const json& require(const json& node, const std::string& key, const std::string& ptr) {
    if (!node.is_object()) throw ParseError(ptr.empty() ? "/" : ptr, "expected an object");
    auto it = node.find(key);
    if (it == node.end()) throw ParseError(ptr + "/" + key, "missing required field");
    return *it;
}

double number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ParseError(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(ptr, "expected a finite number");
    return x;
}

int integer(const json& v, const std::string& ptr) {
    if (!v.is_number_integer()) throw ParseError(ptr, "expected an integer");
    return v.get<int>();
}

std::vector<double> number_list(const json& v, const std::string& ptr) {
    if (!v.is_array()) throw ParseError(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], ptr + "/" + std::to_string(i)));
    return out;
}

Point point(const json& v, const std::string& ptr) {
    const auto xs = number_list(v, ptr);
    if (xs.size() != 2) throw ParseError(ptr, "expected [x, y]");
    return {xs[0], xs[1]};
}

dm::TwistProfile parse_profile(const json& node, const std::string& ptr) {
    const std::string pp = ptr + "/pieces";
    const json& pieces = require(node, "pieces", ptr);
    if (!pieces.is_array() || pieces.empty()) throw ParseError(pp, "expected a non-empty array of pieces");
    std::vector<PiecewisePolynomial::Piece> out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const std::string ip = pp + "/" + std::to_string(i);
        const auto xs = number_list(pieces[i], ip);
        if (xs.size() < 3) throw ParseError(ip, "a piece is [r_lo, r_hi, c0, c1, ...]");
        out.push_back({xs[0], xs[1], std::vector<double>(xs.begin() + 2, xs.end())});
    }
    bool flat = false;
    if (auto it = node.find("flat_at_origin"); it != node.end()) {
        if (!it->is_boolean()) throw ParseError(ptr + "/flat_at_origin", "expected a boolean");
        flat = it->get<bool>();
    }
    try {
        return dm::TwistProfile(PiecewisePolynomial(std::move(out)), flat);
    } catch (const PreconditionError& e) {
        throw ParseError(pp, e.what());
    }
}

dm::HamiltonianTerm parse_term(const json& node, const std::string& ptr) {
    dm::HamiltonianTerm t;
    const json& type = require(node, "type", ptr);
    if (!type.is_string()) throw ParseError(ptr + "/type", "expected a string");
    const auto kind = type.get<std::string>();
    if (kind == "quadratic") {
        t.kind = dm::HamiltonianTerm::Kind::Quadratic;
        t.amplitude = number(require(node, "coeff", ptr), ptr + "/coeff");
    } else if (kind == "bump") {
        t.kind = dm::HamiltonianTerm::Kind::Bump;
        t.center = point(require(node, "center", ptr), ptr + "/center");
        t.radius = number(require(node, "radius", ptr), ptr + "/radius");
        t.amplitude = number(require(node, "amplitude", ptr), ptr + "/amplitude");
        if (auto it = node.find("power"); it != node.end()) t.power = integer(*it, ptr + "/power");
    } else {
        throw ParseError(ptr + "/type", "unknown term type '" + kind + "' (expected bump or quadratic)");
    }
    if (auto it = node.find("time_coeffs"); it != node.end()) {
        t.time_coeffs = number_list(*it, ptr + "/time_coeffs");
        if (t.time_coeffs.empty()) throw ParseError(ptr + "/time_coeffs", "expected at least one coefficient");
    }
    return t;
}

}  // namespace

dm::DiskMap parse_map(const json& node, const std::string& ptr) {
    const json& kind_node = require(node, "kind", ptr);
    if (!kind_node.is_string()) throw ParseError(ptr + "/kind", "expected a string");
    const auto kind = kind_node.get<std::string>();
    if (kind == "rotation") return dm::DiskMap::rotation(number(require(node, "theta0", ptr), ptr + "/theta0"));
    if (kind == "twist") return dm::DiskMap::twist(parse_profile(node, ptr));
    if (kind == "hamiltonian") {
        const int steps = integer(require(node, "steps", ptr), ptr + "/steps");
        if (steps < 1) throw ParseError(ptr + "/steps", "must be >= 1");
        auto integ = dm::Integrator::Midpoint4;
        if (auto it = node.find("integrator"); it != node.end()) {
            if (*it == "midpoint") integ = dm::Integrator::Midpoint;
            else if (*it == "midpoint4") integ = dm::Integrator::Midpoint4;
            else throw ParseError(ptr + "/integrator", "expected \"midpoint\" or \"midpoint4\"");
        }
        const json& terms = require(node, "terms", ptr);
        if (!terms.is_array()) throw ParseError(ptr + "/terms", "expected an array");
        std::vector<dm::HamiltonianTerm> parsed;
        for (std::size_t i = 0; i < terms.size(); ++i)
            parsed.push_back(parse_term(terms[i], ptr + "/terms/" + std::to_string(i)));
        try {
            return dm::DiskMap::hamiltonian_flow(dm::Hamiltonian(std::move(parsed)), steps, integ);
        } catch (const PreconditionError& e) {
            throw ParseError(ptr + "/terms", e.what());
        }
    }
    if (kind == "composition") {
        const json& factors = require(node, "factors", ptr);
        if (!factors.is_array() || factors.empty())
            throw ParseError(ptr + "/factors", "expected a non-empty array of maps");
        std::vector<dm::DiskMap> out;
        for (std::size_t i = 0; i < factors.size(); ++i)
            out.push_back(parse_map(factors[i], ptr + "/factors/" + std::to_string(i)));
        return dm::DiskMap::composition(std::move(out));
    }
    throw ParseError(ptr + "/kind", "unknown map kind '" + kind + "'");
}

MapDocument parse_map_document(const json& doc) {
    MapDocument out{parse_map(doc, ""), 0.0, std::nullopt};
    out.theta0 = out.map.boundary_angle();
    if (auto it = doc.find("theta0"); it != doc.end()) {
        out.theta0 = number(*it, "/theta0");
        dm::check_boundary_angle(out.map, out.theta0);
    }
    if (auto it = doc.find("delta"); it != doc.end()) {
        const double d = number(*it, "/delta");
        if (d < 0.0 || d > 1.0) throw ParseError("/delta", "must lie in [0, 1]");
        if (d > out.map.collar_radius() + 1e-12)
            throw DomainError("declared delta = " + fmt15(d) + " exceeds the rigid collar " +
                              fmt15(out.map.collar_radius()) + " of the map");
        out.delta = d;
    }
    return out;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + " (byte " +
                             std::to_string(e.byte) + ")",
                         e.what());
    }
}

ordered_json map_to_json(const dm::DiskMap& map) {
    return std::visit(
        [&](const auto& k) -> ordered_json {
            using K = std::decay_t<decltype(k)>;
            ordered_json j;
            if constexpr (std::is_same_v<K, dm::RigidRotation>) {
                j["kind"] = "rotation";
                j["theta0"] = k.theta0;
            } else if constexpr (std::is_same_v<K, dm::RadialTwist>) {
                j["kind"] = "twist";
                ordered_json pieces = ordered_json::array();
                for (const auto& p : k.profile.psi().pieces()) {
                    ordered_json row = {p.lo, p.hi};
                    for (double c : p.coeffs) row.push_back(c);
                    pieces.push_back(row);
                }
                j["pieces"] = pieces;
                j["flat_at_origin"] = k.profile.flat_at_origin();
            } else if constexpr (std::is_same_v<K, dm::HamiltonianFlow>) {
                j["kind"] = "hamiltonian";
                j["steps"] = k.steps;
                j["integrator"] = k.integrator == dm::Integrator::Midpoint ? "midpoint" : "midpoint4";
                ordered_json terms = ordered_json::array();
                for (const auto& t : k.hamiltonian.terms()) {
                    ordered_json tj;
                    if (t.kind == dm::HamiltonianTerm::Kind::Quadratic) {
                        tj["type"] = "quadratic";
                        tj["coeff"] = t.amplitude;
                    } else {
                        tj["type"] = "bump";
                        tj["center"] = {t.center.x(), t.center.y()};
                        tj["radius"] = t.radius;
                        tj["amplitude"] = t.amplitude;
                        tj["power"] = t.power;
                    }
                    tj["time_coeffs"] = t.time_coeffs;
                    terms.push_back(tj);
                }
                j["terms"] = terms;
            } else {
                j["kind"] = "composition";
                ordered_json fs = ordered_json::array();
                for (const auto& f : k.factors) fs.push_back(map_to_json(f));
                j["factors"] = fs;
            }
            return j;
        },
        map.kind());
}

}  // namespace calabi::io
