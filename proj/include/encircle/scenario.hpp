#pragma once

// Scenario files (JSON), fitted-curve files, and the plain-text tables written
// by the command-line tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "encircle/boundary.hpp"
#include "encircle/guidance.hpp"
#include "encircle/safety.hpp"
#include "encircle/sim.hpp"

namespace encircle {

struct GeneratorSpec {
    std::string name;  // "circle" or "lobed"
    int samples = 0;
    double noise_std = 0.0;
    std::uint64_t seed = 0;
    Vec2 center = Vec2::Zero();
    double radius = 1.0;  // circle
    double offset = 2.0;  // lobed: r = offset + base^sin(lobes·θ)
    double base = 2.0;
    int lobes = 6;
};

/// Samples at θ_i = 2πi/N about `center`, plus optional seeded Gaussian noise.
std::vector<SamplePoint> generate_boundary(const GeneratorSpec& spec);

enum class SourceKind { Samples, Generator, Curves };

enum class DomainKind { Full, Auto, Explicit };

struct SegmentSpec {
    ReferencePoint reference = Vec2::Zero();
    int harmonics = 1;
    DomainKind domain_kind = DomainKind::Full;
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    std::optional<HalfPlane> region;
    Winding winding = Winding::Ccw;
    // Samples up to this far (m) outside the region also enter the fit.
    double overlap = 0.0;
};

struct Scenario {
    std::string name;
    std::string path;
    std::uint64_t hash = 0;  // FNV-1a of the scenario text

    SourceKind source = SourceKind::Samples;
    std::string source_path;  // resolved against the scenario directory
    GeneratorSpec generator;
    std::vector<SegmentSpec> segments;
    double cutoff_tolerance = 0.25;

    GuidanceParams guidance;
    CbfParams cbf;
    RobotGeometry geometry;
    std::vector<Obstacle> obstacles;
    RobotState initial;
    double t_end = 100.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    double converge_threshold = 0.05;

    std::string output_dir = "out";  // relative to the working directory
    int output_stride = 100;
    Vec2 workspace_lo = Vec2::Zero();
    Vec2 workspace_hi = Vec2::Zero();
    Vec2 lap_center = Vec2::Zero();

    // Filled in by load_scenario.
    std::vector<SamplePoint> samples;
    std::vector<std::vector<SamplePoint>> segment_samples;
    std::vector<FitReport> fit_reports;  // empty for a curve-file source
    std::optional<BoundaryModel> model;
    PartitionCheck partition;
    double cutoff_gap = 0.0;
    std::vector<std::string> notices;

    SimSetup sim_setup() const;
};

/// Parses and fully validates a scenario: fits every segment, checks the
/// region partition over the workspace and the cut-off gap. Throws ParseError
/// (with line) or ValidationError (with the violated precondition as cause).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir,
                        const std::string& origin = "<scenario>");

/// Writes the scenario's inputs (not the derived fit) as JSON that
/// parse_scenario reads back to the same values. Paths are written resolved.
void write_scenario(std::ostream& out, const Scenario& s);

/// Applies command-line overrides and re-checks them.
void override_timing(Scenario& s, std::optional<double> dt, std::optional<double> t_end,
                     std::optional<std::uint64_t> seed);

// ------------------------------------------------------------ fitted curves

void write_curves(std::ostream& out, const BoundaryModel& model);
BoundaryModel read_curves(std::istream& in, const std::string& source = "<stream>");
BoundaryModel read_curves_file(const std::string& path);

/// %.17g; round-trips any double.
std::string format_number(double v);

// ------------------------------------------------------------ run summary

struct RunSummary {
    bool converged = false;
    double time_to_converge = -1.0;
    double min_clearance_overall = 0.0;
    double max_wheel_speed = 0.0;
    double laps = 0.0;
    bool infeasible = false;
    std::size_t critical_steps = 0;
    std::size_t modified_steps = 0;
    std::vector<double> fit_rms;
};

RunSummary summarize(const Scenario& s, const std::vector<StepRecord>& log);

/// Net signed turns of the control point about `center` over the log.
double count_laps(const std::vector<StepRecord>& log, const Vec2& center);

// ------------------------------------------------------------ table writers

void write_metadata(std::ostream& out, const Scenario& s, const std::string& command);
void write_trajectory(std::ostream& out, const std::vector<StepRecord>& log, int stride);
void write_fit_report(std::ostream& out, const Scenario& s);
void write_curve_samples(std::ostream& out, const BoundaryModel& model, int per_segment);
void write_field(std::ostream& out, std::span<const Vec2> points,
                 std::span<const FieldSample> samples);
void write_summary(std::ostream& out, const RunSummary& summary);

}  // namespace encircle
