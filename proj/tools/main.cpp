// encircle: fit, field, run and check subcommands over a scenario file.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "encircle/error.hpp"
#include "encircle/guidance.hpp"
#include "encircle/scenario.hpp"
#include "encircle/sim.hpp"

namespace fs = std::filesystem;
using namespace encircle;

namespace {

enum Exit { kOk = 0, kValidation = 2, kInfeasible = 3, kIo = 4 };

struct Options {
    std::string scenario;
    std::string out;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<std::uint64_t> seed;
    int nx = 50;
    int ny = 50;
    std::optional<double> xmin, xmax, ymin, ymax;
    int samples_per_segment = 400;
    std::string command_line;
};

Scenario load(const Options& o) {
    Scenario s = load_scenario(o.scenario);
    override_timing(s, o.dt, o.t_end, o.seed);
    if (!o.out.empty()) s.output_dir = o.out;
    for (const auto& n : s.notices) std::cerr << "notice: " << n << "\n";
    return s;
}

// Writes through a temporary string so a failed open leaves no partial file.
void emit(const Scenario& s, const std::string& file, const Options& o,
          const std::function<void(std::ostream&)>& body) {
    std::error_code ec;
    fs::create_directories(s.output_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + s.output_dir + ": " + ec.message());
    const fs::path path = fs::path(s.output_dir) / file;
    std::ostringstream buf;
    write_metadata(buf, s, o.command_line);
    body(buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << buf.str();
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_check(const Options& o) {
    const Scenario s = load(o);
    const auto& model = *s.model;
    std::cout << "scenario " << s.name << " ok\n";
    std::cout << "segments " << model.size() << "\n";
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto& seg = model.segments()[i];
        std::cout << "  segment " << i << ": H=" << seg.curve.harmonics()
                  << " winding=" << (seg.winding == Winding::Cw ? "cw" : "ccw");
        if (i < s.fit_reports.size())
            std::cout << " n=" << s.fit_reports[i].n_points
                      << " rms=" << format_number(s.fit_reports[i].rms_residual)
                      << " cond=" << format_number(s.fit_reports[i].condition_estimate);
        std::cout << "\n";
    }
    std::cout << "cutoff_gap " << format_number(s.cutoff_gap) << "\n";
    std::cout << "obstacles " << s.obstacles.size() << "\n";
    std::cout << "steps " << std::llround(s.t_end / s.dt) << "\n";
    return kOk;
}

int cmd_fit(const Options& o) {
    const Scenario s = load(o);
    emit(s, "curves.txt", o, [&](std::ostream& out) { write_curves(out, *s.model); });
    emit(s, "fit_report.txt", o, [&](std::ostream& out) { write_fit_report(out, s); });
    emit(s, "curve_samples.txt", o, [&](std::ostream& out) {
        write_curve_samples(out, *s.model, o.samples_per_segment);
    });
    return kOk;
}

int cmd_field(const Options& o) {
    const Scenario s = load(o);
    if (o.nx < 1 || o.ny < 1) throw Error(ErrorCode::ValidationError, "--nx and --ny must be >= 1");
    const double x0 = o.xmin.value_or(s.workspace_lo.x());
    const double x1 = o.xmax.value_or(s.workspace_hi.x());
    const double y0 = o.ymin.value_or(s.workspace_lo.y());
    const double y1 = o.ymax.value_or(s.workspace_hi.y());
    if (!(x0 < x1) || !(y0 < y1))
        throw Error(ErrorCode::ValidationError, "field grid bounds must satisfy min < max");
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(o.nx) * o.ny);
    for (int j = 0; j < o.ny; ++j) {
        const double y = o.ny == 1 ? y0 : y0 + (y1 - y0) * j / (o.ny - 1);
        for (int i = 0; i < o.nx; ++i) {
            const double x = o.nx == 1 ? x0 : x0 + (x1 - x0) * i / (o.nx - 1);
            pts.emplace_back(x, y);
        }
    }
    const auto samples = field_batch(pts, *s.model, s.guidance);
    emit(s, "field.txt", o, [&](std::ostream& out) { write_field(out, pts, samples); });
    return kOk;
}

int cmd_run(const Options& o) {
    const Scenario s = load(o);
    const auto log = run(s.sim_setup(), [](std::string_view w) { std::cerr << "warning: " << w << "\n"; });
    const RunSummary sum = summarize(s, log);
    emit(s, "trajectory.txt", o, [&](std::ostream& out) { write_trajectory(out, log, s.output_stride); });
    emit(s, "summary.txt", o, [&](std::ostream& out) { write_summary(out, sum); });
    if (sum.infeasible) {
        std::cerr << "error: Infeasible: safety QP infeasible during the run; robot stopped\n";
        return kInfeasible;
    }
    return kOk;
}

int exit_code(const Error& e) {
    switch (e.code()) {
        case ErrorCode::IoError: return kIo;
        case ErrorCode::Infeasible: return kInfeasible;
        default: return kValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary encircling: Fourier boundary fit, vector-field guidance, CBF-QP safety"};
    app.require_subcommand(1);
    Options o;
    o.command_line = "encircle";
    for (int i = 1; i < argc; ++i) o.command_line += " " + std::string(argv[i]);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "scenario JSON file")->required();
        sub->add_option("--out", o.out, "output directory (overrides the scenario)");
        sub->add_option("--dt", o.dt, "time step override (s)");
        sub->add_option("--t-end", o.t_end, "simulated duration override (s)");
        sub->add_option("--seed", o.seed, "seed override");
    };
    auto* check = app.add_subcommand("check", "validate a scenario and print a report");
    auto* fit = app.add_subcommand("fit", "fit the boundary; write curves and fit report");
    auto* field = app.add_subcommand("field", "sample the guiding vector field on a grid");
    auto* runc = app.add_subcommand("run", "simulate the closed loop; write trajectory and summary");
    for (auto* sub : {check, fit, field, runc}) common(sub);
    fit->add_option("--samples", o.samples_per_segment, "curve samples per segment");
    field->add_option("--nx", o.nx, "grid columns");
    field->add_option("--ny", o.ny, "grid rows");
    field->add_option("--xmin", o.xmin);
    field->add_option("--xmax", o.xmax);
    field->add_option("--ymin", o.ymin);
    field->add_option("--ymax", o.ymax);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*check) return cmd_check(o);
        if (*fit) return cmd_fit(o);
        if (*field) return cmd_field(o);
        return cmd_run(o);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code());
        if (e.cause()) std::cerr << " cause=" << to_string(*e.cause());
        std::cerr << ": " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return 1;
    }
}
