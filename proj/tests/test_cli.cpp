#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "calabi/cli.hpp"
#include "calabi/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace cli = calabi::cli;

struct Outcome {
    int code;
    std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::main_entry(args, out, err);
    return {code, out.str(), err.str()};
}

std::string example(const std::string& name) { return std::string(CALABI_EXAMPLES_DIR) + "/" + name; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << contents;
    return p;
}

}  // namespace

TEST_CASE("real-number arguments") {
    CHECK(cli::parse_real("0.25") == 0.25);
    CHECK(cli::parse_real(" -1.5e-3 ") == -1.5e-3);
    CHECK(cli::parse_real("pi") == std::numbers::pi);
    CHECK(cli::parse_real("sqrt(2)") == std::sqrt(2.0));
    CHECK(cli::parse_real("1/3") == 1.0 / 3.0);
    CHECK(cli::parse_real("2*pi") == 2.0 * std::numbers::pi);
    CHECK(cli::parse_real("sqrt(1/2)*2") == std::sqrt(0.5) * 2.0);
    for (const char* bad : {"", "abc", "1/0", "sqrt(-1)", "1.2.3", "2**3"})
        CHECK_THROWS_AS(cli::parse_real(bad), calabi::ParseError);
}

TEST_CASE("check-theorem on the quadratic twist") {
    const auto r = invoke({"check-theorem", example("quadratic_twist.json")});
    REQUIRE(r.code == cli::kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["calabi"].get<double>() - 0.2) < 1e-12);
    CHECK(j["hypothesis_holds"].get<bool>());
    CHECK(j["conclusion_holds"].get<bool>());
    CHECK(j["min_mean_action"].get<double>() <= 0.2);
}

TEST_CASE("calabi of a rotation and a collared twist") {
    auto r = invoke({"calabi", example("rotation.json")});
    REQUIRE(r.code == cli::kOk);
    CHECK(std::abs(nlohmann::json::parse(r.out)["calabi"].get<double>() - 0.3) < 1e-12);

    // psi = 0.2 + d s(r / a) on [0, a] with s the smoothstep and constant beyond;
    // calabi = theta0 - int_0^1 r^4 psi'(r) dr = theta0 - d a^4 / 7.
    const double a = 0.8, d = 0.1;
    const double integral = d * std::pow(a, 4) / 7.0;
    r = invoke({"calabi", example("collared_twist.json")});
    REQUIRE(r.code == cli::kOk);
    CHECK(std::abs(nlohmann::json::parse(r.out)["calabi"].get<double>() - (0.3 - integral)) < 1e-12);
}

TEST_CASE("nk table for the round ball") {
    const auto r = invoke({"nk", "--a", "1", "--b", "1", "--k-max", "6"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0][0] == "k");
    // Sorted multiset of m + n over (m, n) in N^2: each value j appears j + 1 times.
    std::vector<int> expect;
    for (int j = 0; expect.size() < 7; ++j)
        for (int i = 0; i <= j; ++i) expect.push_back(j);
    for (int k = 0; k <= 6; ++k) {
        CHECK(rows[static_cast<std::size_t>(k) + 1][0] == std::to_string(k));
        CHECK(std::stod(rows[static_cast<std::size_t>(k) + 1][1]) == expect[static_cast<std::size_t>(k)]);
    }
    CHECK(rows[1][5].empty());
}

TEST_CASE("spectrum of E(1, sqrt 2) approaches the volume") {
    const auto r = invoke({"spectrum", "--a", "1", "--b", "sqrt(2)", "--k-max", "100000"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 100002);
    const auto& last = rows.back();
    CHECK(last[0] == "100000");
    CHECK(last[4] == "200000");
    CHECK(std::abs(std::stod(last[5]) - std::sqrt(2.0)) <= 0.01 * std::sqrt(2.0));
}

TEST_CASE("filtration ranks") {
    const auto r = invoke({"filtration", "--theta0", "sqrt(2)", "--R", "1.42", "--k-max", "4"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 6);
    // N_k(1, sqrt 2) = 0, 1, sqrt 2, 2, 1 + sqrt 2
    const std::vector<std::string> ranks{"1", "1", "1", "0", "0"};
    for (std::size_t k = 0; k < 5; ++k) CHECK(rows[k + 1].back() == ranks[k]);
}

TEST_CASE("bounds report and its domain error") {
    auto r = invoke({"bounds", "--theta0", "0.618", "--V", "0.3", "--eps", "0.01", "--k", "100", "--c", "4.7"});
    REQUIRE(r.code == cli::kOk);
    const auto j = nlohmann::json::parse(r.out);
    const double theta0 = 0.618, ve = 0.31, c = 4.7, k = 100;
    const double expect = std::sqrt(2 * k * ve / (2 * k / theta0 - c * std::sqrt(k)));
    CHECK(std::abs(j["mean_action_bound"].get<double>() - expect) < 1e-13);
    CHECK(std::abs(j["mean_action_limit"].get<double>() - std::sqrt(ve * theta0)) < 1e-13);
    CHECK(j["c_source"] == "given");

    r = invoke({"bounds", "--theta0", "0.618", "--V", "0.3", "--eps", "0.01", "--k", "2", "--c", "4.7"});
    CHECK(r.code == cli::kPrecondition);
    CHECK(r.err.find("minimal admissible k") != std::string::npos);

    r = invoke({"bounds", "--theta0", "0.3", "--V", "0.3", "--eps", "0.01", "--k", "100"});
    CHECK(r.code == cli::kPrecondition);
}

TEST_CASE("suspend report for the quadratic twist") {
    const auto svg = std::filesystem::temp_directory_path() / "calabi_cli_heat.svg";
    const auto r = invoke({"suspend", example("quadratic_twist.json"), "--twist-target", "0.25", "--plot", svg.string()});
    REQUIRE(r.code == cli::kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["contact"].get<bool>());
    CHECK(j["min_F"].get<double>() > 0.0);
    CHECK(std::abs(j["volume"].get<double>() - 0.2) < 1e-7);
    const auto& t = j["boundary_twist"]["result"];
    REQUIRE(t.is_object());
    CHECK(t["toward_target"].get<bool>());
    CHECK(t["inner_ok"].get<bool>());
    CHECK(t["calabi_ok"].get<bool>());
    std::ifstream in(svg);
    std::string head;
    std::getline(in, head);
    CHECK(head.rfind("<svg", 0) == 0);
}

TEST_CASE("exit codes") {
    CHECK(invoke({}).code == cli::kMalformed);
    CHECK(invoke({"frobnicate"}).code == cli::kMalformed);
    CHECK(invoke({"nk", "--a", "one", "--b", "1"}).code == cli::kMalformed);
    CHECK(invoke({"calabi", example("rotation.json"), "--quad-tol", "-1"}).code == cli::kPrecondition);
    CHECK(invoke({"--help"}).code == cli::kOk);

    auto r = invoke({"calabi", "/nonexistent/map.json"});
    CHECK(r.code == cli::kIo);
    CHECK(r.err.rfind("error: ", 0) == 0);

    r = invoke({"calabi", temp_file("calabi_cli_truncated.json", "{\n  \"kind\": ").string()});
    CHECK(r.code == cli::kMalformed);
    CHECK(r.err.find("line 2") != std::string::npos);

    r = invoke({"calabi", temp_file("calabi_cli_nopieces.json", R"({"kind": "twist"})").string()});
    CHECK(r.code == cli::kMalformed);
    CHECK(r.err.find("/pieces") != std::string::npos);

    r = invoke({"calabi", example("quadratic_twist.json"), "--theta0", "0.31"});
    CHECK(r.code == cli::kPrecondition);

    r = invoke({"suspend", example("quadratic_twist.json"), "--theta0", "-0.7"});
    CHECK(r.code == cli::kPrecondition);
    CHECK(r.err.find("theta0 + n") != std::string::npos);

    r = invoke({"calabi", example("quadratic_twist.json"), "--method", "adaptive-2d", "--quad-tol", "1e-300"});
    CHECK(r.code == cli::kNumeric);
    CHECK(r.err.find("partial estimate") != std::string::npos);

    CHECK(invoke({"nk", "--a", "1", "--b", "1", "--k-max", "100000000000"}).code == cli::kNumeric);

    r = invoke({"calabi", example("rotation.json"), "-o", "/nonexistent/dir/out.json"});
    CHECK(r.code == cli::kIo);
}

TEST_CASE("output is byte-identical across runs and matches the output file") {
    const std::vector<std::string> base{"check-theorem", example("hamiltonian_bump.json"), "--d-max", "3", "--grid-n", "8"};
    const auto first = invoke(base);
    REQUIRE(first.code == cli::kOk);
    auto threaded = base;
    threaded.insert(threaded.end(), {"--workers", "4"});
    CHECK(invoke(threaded).out == first.out);

    const auto path = std::filesystem::temp_directory_path() / "calabi_cli_verdict.json";
    auto to_file = base;
    to_file.insert(to_file.end(), {"-o", path.string()});
    const auto r = invoke(to_file);
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.empty());
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == first.out);

    CHECK(invoke({"nk", "--a", "1", "--b", "pi", "--k-max", "500"}).out ==
          invoke({"nk", "--a", "1", "--b", "pi", "--k-max", "500"}).out);
}

TEST_CASE("reports list the schema's required fields in order") {
    auto required_in_order = [](const std::string& schema_file, const nlohmann::ordered_json& doc) {
        std::ifstream in(std::string(CALABI_SCHEMA_DIR) + "/" + schema_file);
        const auto schema = nlohmann::json::parse(in);
        std::vector<std::string> keys;
        for (const auto& [k, _] : doc.items()) keys.push_back(k);
        REQUIRE(keys.size() >= schema["required"].size());
        for (std::size_t i = 0; i < schema["required"].size(); ++i)
            CHECK(keys[i] == schema["required"][i].get<std::string>());
    };
    auto r = invoke({"check-theorem", example("collared_twist.json")});
    REQUIRE(r.code == cli::kOk);
    required_in_order("verdict.schema.json", nlohmann::ordered_json::parse(r.out));
    r = invoke({"suspend", example("rotation.json")});
    REQUIRE(r.code == cli::kOk);
    required_in_order("suspension_report.schema.json", nlohmann::ordered_json::parse(r.out));

    std::ifstream in(std::string(CALABI_SCHEMA_DIR) + "/map.schema.json");
    const auto schema = nlohmann::json::parse(in);
    for (const char* kind : {"rotation", "twist", "hamiltonian", "composition"})
        CHECK(schema["$defs"].contains(kind));
}
