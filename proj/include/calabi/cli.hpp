#pragma once

// Command-line front end. `main_entry` parses arguments into a RunConfig and
// calls `run`; both write reports to `out` (or the configured output file)
// and diagnostics to `err`.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace calabi::cli {

enum ExitCode : int {
    kOk = 0,
    kMalformed = 1,     ///< unparsable arguments or input document
    kPrecondition = 2,  ///< precondition, domain or resonance-guard failure
    kNumeric = 3,       ///< quadrature/Newton failure, exhausted budget, internal consistency
    kInconclusive = 4,  ///< check-theorem found no periodic orbit
    kIo = 5,            ///< a file could not be read or written
};

enum class Command { Calabi, Orbits, CheckTheorem, Suspend, Nk, Spectrum, Filtration, Bounds };

struct Tolerances {
    double quad_tol = 1e-9;
    double newton_tol = 1e-10;
    double dedupe_eps = 1e-7;
    double eps_res = 1e-9;
    double theorem_tol = 1e-6;
};

struct Limits {
    int d_max = 6;
    int grid_n = 16;
    long k_max = 100;
    int workers = 1;
    int samples = 1000;
};

struct RunConfig {
    Command command = Command::Calabi;
    std::string input_path;
    std::string output_path;  ///< empty: write to `out`
    std::string plot_path;    ///< optional SVG
    Tolerances tol;
    Limits limits;

    std::string method = "auto";            ///< calabi: auto | polar | adaptive-2d
    std::optional<double> theta0;           ///< overrides the document's theta0; filtration/bounds input
    double a = 1.0, b = 1.0;                ///< nk, spectrum
    long k = 1;                             ///< bounds
    double R = 0.0;                         ///< filtration level
    double V = 0.0, eps = 0.0;              ///< bounds
    std::optional<double> c;                ///< bounds: lower-bound constant; scanned when absent
    std::optional<double> eps_eta;          ///< suspend: smoothing profile eps
    std::optional<double> twist_target;     ///< suspend: run the boundary-twist search
    double twist_eps = 0.05;
};

/// Reals written as decimals, "pi", "sqrt(x)", "p/q", or a product of those with "*".
double parse_real(const std::string& text);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace calabi::cli
