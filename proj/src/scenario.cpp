#include "encircle/scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <random>
#include <sstream>

#include "encircle/error.hpp"

namespace encircle {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ValidationError, what); }

[[noreturn]] void invalid(ErrorCode cause, const std::string& what) {
    throw Error(ErrorCode::ValidationError, cause, what);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& ctx) {
    if (!obj.is_object()) invalid(ctx + " must be an object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) invalid("unknown key '" + item.key() + "' in " + ctx);
    }
}

double number(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key)) invalid("missing required key '" + std::string(key) + "' in " + ctx);
    const json& v = obj.at(key);
    if (!v.is_number()) invalid(ctx + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(ctx + "." + key + " must be finite");
    return d;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& ctx) {
    return obj.contains(key) ? number(obj, key, ctx) : fallback;
}

std::int64_t integer(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key)) invalid("missing required key '" + std::string(key) + "' in " + ctx);
    const json& v = obj.at(key);
    if (!v.is_number_integer()) invalid(ctx + "." + key + " must be an integer");
    return v.get<std::int64_t>();
}

std::int64_t integer_or(const json& obj, const char* key, std::int64_t fallback,
                        const std::string& ctx) {
    return obj.contains(key) ? integer(obj, key, ctx) : fallback;
}

std::uint64_t seed_or(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key)) return 0;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) invalid(ctx + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string text(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key)) invalid("missing required key '" + std::string(key) + "' in " + ctx);
    const json& v = obj.at(key);
    if (!v.is_string()) invalid(ctx + "." + key + " must be a string");
    return v.get<std::string>();
}

Vec2 vec2(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        invalid(ctx + " must be a two-element numeric array");
    const Vec2 p{v[0].get<double>(), v[1].get<double>()};
    if (!p.allFinite()) invalid(ctx + " must be finite");
    return p;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
    const std::filesystem::path path(p);
    if (path.is_absolute() || base_dir.empty()) return p;
    return (std::filesystem::path(base_dir) / path).string();
}

GeneratorSpec parse_generator(const json& src) {
    const std::string ctx = "boundary.source";
    GeneratorSpec g;
    g.name = text(src, "name", ctx);
    g.samples = static_cast<int>(integer(src, "samples", ctx));
    g.noise_std = number_or(src, "noise_std", 0.0, ctx);
    g.seed = seed_or(src, "seed", ctx);
    if (src.contains("center")) g.center = vec2(src.at("center"), ctx + ".center");
    if (g.name == "circle") {
        check_keys(src, {"type", "name", "samples", "noise_std", "seed", "center", "radius"}, ctx);
        g.radius = number(src, "radius", ctx);
        if (!(g.radius > 0.0)) invalid(ctx + ".radius must be > 0");
    } else if (g.name == "lobed") {
        check_keys(src, {"type", "name", "samples", "noise_std", "seed", "center", "offset", "base",
                         "lobes"},
                   ctx);
        g.offset = number_or(src, "offset", 2.0, ctx);
        g.base = number_or(src, "base", 2.0, ctx);
        g.lobes = static_cast<int>(integer_or(src, "lobes", 6, ctx));
        if (!(g.base > 0.0)) invalid(ctx + ".base must be > 0");
    } else {
        invalid("unknown boundary generator '" + g.name + "'");
    }
    if (g.samples < 3) invalid(ctx + ".samples must be at least 3");
    if (!(g.noise_std >= 0.0)) invalid(ctx + ".noise_std must be >= 0");
    return g;
}

SegmentSpec parse_segment(const json& js, std::size_t i, bool multi,
                          std::vector<std::string>& notices) {
    const std::string ctx = "boundary.segments[" + std::to_string(i) + "]";
    check_keys(js, {"reference", "harmonics", "domain", "region", "winding", "overlap"}, ctx);
    SegmentSpec seg;
    if (!js.contains("reference")) invalid("missing required key 'reference' in " + ctx);
    seg.reference = vec2(js.at("reference"), ctx + ".reference");
    const auto h = integer(js, "harmonics", ctx);
    if (h < 1 || h > 10000) invalid(ctx + ".harmonics must be in [1, 10000]");
    seg.harmonics = static_cast<int>(h);

    seg.domain_kind = multi ? DomainKind::Auto : DomainKind::Full;
    if (js.contains("domain")) {
        const json& d = js.at("domain");
        if (d.is_string()) {
            const auto s = d.get<std::string>();
            if (s == "full") seg.domain_kind = DomainKind::Full;
            else if (s == "auto") seg.domain_kind = DomainKind::Auto;
            else invalid(ctx + ".domain must be \"full\", \"auto\" or {lo, hi}");
        } else {
            check_keys(d, {"lo", "hi"}, ctx + ".domain");
            seg.domain_kind = DomainKind::Explicit;
            seg.domain_lo = number(d, "lo", ctx + ".domain");
            seg.domain_hi = number(d, "hi", ctx + ".domain");
            if (wrap_two_pi(seg.domain_lo) == wrap_two_pi(seg.domain_hi))
                invalid(ctx + ".domain has lo == hi");
        }
    }
    if (js.contains("region")) {
        const json& r = js.at("region");
        check_keys(r, {"point", "normal"}, ctx + ".region");
        if (!r.contains("point") || !r.contains("normal"))
            invalid(ctx + ".region needs 'point' and 'normal'");
        HalfPlane hp{vec2(r.at("point"), ctx + ".region.point"),
                     vec2(r.at("normal"), ctx + ".region.normal")};
        if (!(hp.normal.norm() > 0.0)) invalid(ctx + ".region.normal must be nonzero");
        seg.region = hp;
    } else if (multi) {
        invalid(ctx + " needs a region half-plane in a multi-segment boundary");
    }
    if (js.contains("winding")) {
        const auto w = text(js, "winding", ctx);
        if (w == "ccw") seg.winding = Winding::Ccw;
        else if (w == "cw") seg.winding = Winding::Cw;
        else invalid(ctx + ".winding must be \"ccw\" or \"cw\"");
    } else {
        notices.push_back(ctx + ": winding not given, defaulting to ccw");
    }
    seg.overlap = number_or(js, "overlap", 0.0, ctx);
    if (!(seg.overlap >= 0.0)) invalid(ctx + ".overlap must be >= 0");
    return seg;
}

AngleDomain auto_domain(const std::vector<SamplePoint>& pts, const Vec2& ref) {
    std::vector<double> a;
    a.reserve(pts.size());
    for (const auto& p : pts) a.push_back(polar_angle(p, ref));
    std::sort(a.begin(), a.end());
    // The widest angular gap between consecutive samples is the part of the
    // circle not covered by this segment.
    std::size_t after = 0;
    double widest = a.front() + kTwoPi - a.back();
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i] - a[i - 1] > widest) {
            widest = a[i] - a[i - 1];
            after = i;
        }
    }
    const double lo = a[after];
    const double hi = a[(after + a.size() - 1) % a.size()];
    return AngleDomain::interval(lo, hi);
}

void fit_all(Scenario& s) {
    const std::size_t nseg = s.segments.size();
    s.segment_samples.assign(nseg, {});
    for (const auto& p : s.samples) {
        bool owned = false;
        for (std::size_t i = 0; i < nseg; ++i) {
            const auto& spec = s.segments[i];
            if (!spec.region) {
                s.segment_samples[i].push_back(p);
                owned = true;
                continue;
            }
            const double outside =
                (p - spec.region->point).dot(spec.region->normal.normalized());
            if ((!owned && outside <= 0.0) || (spec.overlap > 0.0 && outside <= spec.overlap)) {
                s.segment_samples[i].push_back(p);
                owned = owned || outside <= 0.0;
            }
        }
    }

    std::vector<Segment> fitted;
    for (std::size_t i = 0; i < nseg; ++i) {
        const auto& spec = s.segments[i];
        const auto& pts = s.segment_samples[i];
        const std::string where = "segment " + std::to_string(i) + ": ";
        try {
            const std::size_t needed = 2 * static_cast<std::size_t>(spec.harmonics) + 2;
            if (pts.size() < needed)
                invalid(ErrorCode::TooFewPoints,
                        where + std::to_string(pts.size()) + " samples cannot fit H = " +
                            std::to_string(spec.harmonics) + " (need N >= 2H+2 = " +
                            std::to_string(needed) + ")");
            AngleDomain domain = AngleDomain::full();
            if (spec.domain_kind == DomainKind::Explicit)
                domain = AngleDomain::interval(spec.domain_lo, spec.domain_hi);
            else if (spec.domain_kind == DomainKind::Auto)
                domain = auto_domain(pts, spec.reference);
            FitResult res = fit_segment(pts, spec.reference, spec.harmonics, domain);
            s.fit_reports.push_back(res.report);
            fitted.push_back({std::move(res.curve), spec.region, spec.winding});
        } catch (const Error& err) {
            if (err.code() == ErrorCode::ValidationError) throw;
            invalid(err.code(), where + err.what());
        }
    }
    s.model.emplace(std::move(fitted));
}

void finish(Scenario& s, bool workspace_given, bool lap_center_given) {
    const BoundaryModel& model = *s.model;
    if (!workspace_given) {
        std::vector<Vec2> pts = s.samples;
        if (pts.empty()) {
            for (const auto& seg : model.segments()) {
                const auto& dom = seg.curve.domain();
                for (int k = 0; k <= 360; ++k) {
                    const double rho = dom.lo() + dom.length() * k / 360.0;
                    pts.push_back(eval_curve(seg.curve, dom.clamp(rho)));
                }
            }
        }
        Vec2 lo = pts.front(), hi = pts.front();
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec2 pad = 0.5 * (hi - lo);
        s.workspace_lo = lo - pad;
        s.workspace_hi = hi + pad;
    }
    if (!lap_center_given) {
        Vec2 c = Vec2::Zero();
        for (const auto& seg : model.segments()) c += seg.curve.ref();
        s.lap_center = c / static_cast<double>(model.size());
    }

    s.partition = model.check_partition(s.workspace_lo, s.workspace_hi);
    if (!s.partition.ok)
        invalid(ErrorCode::NoSegment,
                "segment regions do not partition the workspace (" +
                    std::to_string(s.partition.uncovered) + " uncovered, " +
                    std::to_string(s.partition.overlapping) + " overlapping grid points)");
    s.cutoff_gap = model.cutoff_gap();
    if (s.cutoff_gap > s.cutoff_tolerance)
        invalid("cut-off gap " + format_number(s.cutoff_gap) + " m exceeds cutoff_tolerance " +
                format_number(s.cutoff_tolerance) + " m");

    try {
        s.geometry.validate();
    } catch (const Error& err) {
        invalid(err.code(), err.what());
    }
    s.guidance.validate();
    if (!(s.cbf.alpha > 0.0)) invalid("cbf.alpha must be > 0");
    if (!(s.dt > 0.0)) invalid("sim.dt must be > 0");
    if (!(s.t_end > 0.0)) invalid("sim.t_end must be > 0");
    if (!(s.converge_threshold > 0.0)) invalid("sim.converge_threshold must be > 0");
    if (s.output_stride < 1) invalid("output.stride must be >= 1");

    const Vec2 x0 = s.initial.control_point(s.geometry.l);
    const auto seg = model.locate(x0);
    try {
        polar_angle(x0, model.segments()[*seg].curve.ref());
    } catch (const Error& err) {
        invalid(ErrorCode::ZeroRadius, std::string("initial control point: ") + err.what());
    }
    for (std::size_t i = 0; i < s.obstacles.size(); ++i)
        if (barrier_value(x0, s.obstacles[i]) < 0.0)
            s.notices.push_back("initial control point lies inside inflated obstacle " +
                                std::to_string(i));
}

}  // namespace

// ------------------------------------------------------------------ generators

std::vector<SamplePoint> generate_boundary(const GeneratorSpec& g) {
    std::vector<SamplePoint> pts;
    pts.reserve(g.samples);
    std::mt19937_64 gen(g.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < g.samples; ++i) {
        const double th = kTwoPi * i / g.samples;
        double r = g.radius;
        if (g.name == "lobed") r = g.offset + std::pow(g.base, std::sin(g.lobes * th));
        else if (g.name != "circle") invalid("unknown boundary generator '" + g.name + "'");
        Vec2 p = g.center + r * Vec2(std::cos(th), std::sin(th));
        if (g.noise_std > 0.0) {
            const double nx = noise(gen);
            const double ny = noise(gen);
            p += g.noise_std * Vec2(nx, ny);
        }
        pts.push_back(p);
    }
    return pts;
}

// -------------------------------------------------------------------- scenario

SimSetup Scenario::sim_setup() const {
    if (!model) invalid("scenario has no boundary model");
    return SimSetup{World{obstacles, *model}, guidance, cbf, geometry, initial, t_end, dt, seed};
}

Scenario parse_scenario(const std::string& content, const std::string& base_dir,
                        const std::string& origin) {
    json root;
    try {
        root = json::parse(content);
    } catch (const json::parse_error& err) {
        const std::size_t byte = std::min<std::size_t>(err.byte, content.size());
        const auto line = 1 + std::count(content.begin(), content.begin() + byte, '\n');
        throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ": " + err.what());
    }

    Scenario s;
    s.path = origin;
    s.hash = fnv1a(content);
    check_keys(root, {"name", "boundary", "guidance", "cbf", "robot", "obstacles", "initial_state",
                      "sim", "output", "workspace", "lap_center"},
               "scenario");
    s.name = root.contains("name") ? text(root, "name", "scenario") : origin;

    // boundary
    if (!root.contains("boundary")) invalid("missing required key 'boundary' in scenario");
    const json& b = root.at("boundary");
    check_keys(b, {"source", "segments", "cutoff_tolerance"}, "boundary");
    if (!b.contains("source")) invalid("missing required key 'source' in boundary");
    const json& src = b.at("source");
    const std::string kind = text(src, "type", "boundary.source");
    if (kind == "samples") {
        check_keys(src, {"type", "path"}, "boundary.source");
        s.source = SourceKind::Samples;
        s.source_path = resolve(base_dir, text(src, "path", "boundary.source"));
    } else if (kind == "generator") {
        s.source = SourceKind::Generator;
        s.generator = parse_generator(src);
    } else if (kind == "curves") {
        check_keys(src, {"type", "path"}, "boundary.source");
        s.source = SourceKind::Curves;
        s.source_path = resolve(base_dir, text(src, "path", "boundary.source"));
    } else {
        invalid("boundary.source.type must be samples, generator or curves");
    }
    s.cutoff_tolerance = number_or(b, "cutoff_tolerance", 0.25, "boundary");
    if (!(s.cutoff_tolerance >= 0.0)) invalid("boundary.cutoff_tolerance must be >= 0");

    if (s.source == SourceKind::Curves) {
        if (b.contains("segments"))
            invalid("boundary.segments must be omitted for a curves source (the file carries them)");
    } else {
        if (!b.contains("segments") || !b.at("segments").is_array() || b.at("segments").empty())
            invalid("boundary.segments must be a non-empty array");
        const json& segs = b.at("segments");
        for (std::size_t i = 0; i < segs.size(); ++i)
            s.segments.push_back(parse_segment(segs[i], i, segs.size() > 1, s.notices));
    }

    // guidance
    if (!root.contains("guidance")) invalid("missing required key 'guidance' in scenario");
    const json& g = root.at("guidance");
    check_keys(g, {"k", "v_d", "e_d", "eps_tau", "escape_speed", "error_sign"}, "guidance");
    s.guidance.k = number(g, "k", "guidance");
    s.guidance.v_d = number(g, "v_d", "guidance");
    s.guidance.e_d = number_or(g, "e_d", 0.0, "guidance");
    s.guidance.eps_tau = number_or(g, "eps_tau", 1e-6, "guidance");
    s.guidance.escape_speed = number_or(g, "escape_speed", 0.05 * s.guidance.v_d, "guidance");
    if (g.contains("error_sign")) {
        const auto m = text(g, "error_sign", "guidance");
        if (m == "signed") s.guidance.error_sign = ErrorSign::Signed;
        else if (m == "unsigned") s.guidance.error_sign = ErrorSign::Unsigned;
        else invalid("guidance.error_sign must be \"signed\" or \"unsigned\"");
    }
    s.guidance.validate();

    if (root.contains("cbf")) {
        const json& c = root.at("cbf");
        check_keys(c, {"alpha"}, "cbf");
        s.cbf.alpha = number_or(c, "alpha", 1.0, "cbf");
    }

    if (!root.contains("robot")) invalid("missing required key 'robot' in scenario");
    const json& r = root.at("robot");
    check_keys(r, {"l", "d", "r_b", "v_m"}, "robot");
    s.geometry.l = number_or(r, "l", 0.01, "robot");
    s.geometry.d = number_or(r, "d", 0.3, "robot");
    s.geometry.r_b = number_or(r, "r_b", 0.05, "robot");
    s.geometry.v_m = number(r, "v_m", "robot");

    if (root.contains("obstacles")) {
        const json& obs = root.at("obstacles");
        if (!obs.is_array()) invalid("obstacles must be an array");
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const std::string ctx = "obstacles[" + std::to_string(i) + "]";
            check_keys(obs[i], {"center", "radius"}, ctx);
            if (!obs[i].contains("center")) invalid("missing required key 'center' in " + ctx);
            const Vec2 c = vec2(obs[i].at("center"), ctx + ".center");
            const double rad = number(obs[i], "radius", ctx);
            if (!(rad >= 0.0)) invalid(ctx + ".radius must be >= 0");
            s.obstacles.push_back(Obstacle::inflate(c, rad, s.geometry.r_b));
        }
    }

    if (!root.contains("initial_state")) invalid("missing required key 'initial_state' in scenario");
    const json& is = root.at("initial_state");
    check_keys(is, {"p_x", "p_y", "theta"}, "initial_state");
    s.initial.p_x = number(is, "p_x", "initial_state");
    s.initial.p_y = number(is, "p_y", "initial_state");
    s.initial.theta = wrap_pi(number_or(is, "theta", 0.0, "initial_state"));

    if (root.contains("sim")) {
        const json& sim = root.at("sim");
        check_keys(sim, {"t_end", "dt", "seed", "converge_threshold"}, "sim");
        s.t_end = number_or(sim, "t_end", s.t_end, "sim");
        s.dt = number_or(sim, "dt", s.dt, "sim");
        s.seed = seed_or(sim, "seed", "sim");
        s.converge_threshold = number_or(sim, "converge_threshold", 0.05, "sim");
    }
    if (root.contains("output")) {
        const json& out = root.at("output");
        check_keys(out, {"dir", "stride"}, "output");
        if (out.contains("dir")) s.output_dir = text(out, "dir", "output");
        s.output_stride = static_cast<int>(integer_or(out, "stride", 100, "output"));
    }
    const bool workspace_given = root.contains("workspace");
    if (workspace_given) {
        const json& ws = root.at("workspace");
        check_keys(ws, {"min", "max"}, "workspace");
        if (!ws.contains("min") || !ws.contains("max")) invalid("workspace needs 'min' and 'max'");
        s.workspace_lo = vec2(ws.at("min"), "workspace.min");
        s.workspace_hi = vec2(ws.at("max"), "workspace.max");
        if (!(s.workspace_lo.array() < s.workspace_hi.array()).all())
            invalid("workspace.min must be below workspace.max");
    }
    const bool lap_given = root.contains("lap_center");
    if (lap_given) s.lap_center = vec2(root.at("lap_center"), "lap_center");

    // Derived data: samples, fits, cross-field checks.
    switch (s.source) {
        case SourceKind::Samples: s.samples = read_samples_file(s.source_path); break;
        case SourceKind::Generator: s.samples = generate_boundary(s.generator); break;
        case SourceKind::Curves: s.model.emplace(read_curves_file(s.source_path)); break;
    }
    if (s.source != SourceKind::Curves) fit_all(s);
    finish(s, workspace_given, lap_given);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open scenario " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path().string();
    return parse_scenario(ss.str(), dir, path);
}

namespace {

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

void write_scenario(std::ostream& out, const Scenario& s) {
    json root;
    root["name"] = s.name;
    json src;
    switch (s.source) {
        case SourceKind::Samples:
            src = {{"type", "samples"}, {"path", s.source_path}};
            break;
        case SourceKind::Curves:
            src = {{"type", "curves"}, {"path", s.source_path}};
            break;
        case SourceKind::Generator: {
            const auto& g = s.generator;
            src = {{"type", "generator"}, {"name", g.name}, {"samples", g.samples},
                   {"noise_std", g.noise_std}, {"seed", g.seed}, {"center", vec_json(g.center)}};
            if (g.name == "circle") {
                src["radius"] = g.radius;
            } else {
                src["offset"] = g.offset;
                src["base"] = g.base;
                src["lobes"] = g.lobes;
            }
            break;
        }
    }
    json b = {{"source", src}, {"cutoff_tolerance", s.cutoff_tolerance}};
    if (s.source != SourceKind::Curves) {
        json segs = json::array();
        for (const auto& seg : s.segments) {
            json js = {{"reference", vec_json(seg.reference)},
                       {"harmonics", seg.harmonics},
                       {"winding", seg.winding == Winding::Cw ? "cw" : "ccw"},
                       {"overlap", seg.overlap}};
            if (seg.domain_kind == DomainKind::Full) js["domain"] = "full";
            else if (seg.domain_kind == DomainKind::Auto) js["domain"] = "auto";
            else js["domain"] = {{"lo", seg.domain_lo}, {"hi", seg.domain_hi}};
            if (seg.region)
                js["region"] = {{"point", vec_json(seg.region->point)},
                                {"normal", vec_json(seg.region->normal)}};
            segs.push_back(js);
        }
        b["segments"] = segs;
    }
    root["boundary"] = b;
    root["guidance"] = {{"k", s.guidance.k},
                        {"v_d", s.guidance.v_d},
                        {"e_d", s.guidance.e_d},
                        {"eps_tau", s.guidance.eps_tau},
                        {"escape_speed", s.guidance.escape_speed},
                        {"error_sign", s.guidance.error_sign == ErrorSign::Signed ? "signed" : "unsigned"}};
    root["cbf"] = {{"alpha", s.cbf.alpha}};
    root["robot"] = {{"l", s.geometry.l}, {"d", s.geometry.d}, {"r_b", s.geometry.r_b},
                     {"v_m", s.geometry.v_m}};
    json obs = json::array();
    for (const auto& o : s.obstacles)
        obs.push_back({{"center", vec_json(o.center)}, {"radius", o.raw_radius}});
    root["obstacles"] = obs;
    root["initial_state"] = {{"p_x", s.initial.p_x}, {"p_y", s.initial.p_y}, {"theta", s.initial.theta}};
    root["sim"] = {{"t_end", s.t_end}, {"dt", s.dt}, {"seed", s.seed},
                   {"converge_threshold", s.converge_threshold}};
    root["output"] = {{"dir", s.output_dir}, {"stride", s.output_stride}};
    root["workspace"] = {{"min", vec_json(s.workspace_lo)}, {"max", vec_json(s.workspace_hi)}};
    root["lap_center"] = vec_json(s.lap_center);
    out << root.dump(2) << "\n";
}

void override_timing(Scenario& s, std::optional<double> dt, std::optional<double> t_end,
                     std::optional<std::uint64_t> seed) {
    if (dt) {
        if (!(*dt > 0.0) || !std::isfinite(*dt)) invalid("--dt must be > 0");
        s.dt = *dt;
    }
    if (t_end) {
        if (!(*t_end > 0.0) || !std::isfinite(*t_end)) invalid("--t-end must be > 0");
        s.t_end = *t_end;
    }
    if (seed) s.seed = *seed;
}

// --------------------------------------------------------------- curve files

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_curves(std::ostream& out, const BoundaryModel& model) {
    out << "# encircle fitted boundary\n";
    out << "segments " << model.size() << "\n";
    for (std::size_t i = 0; i < model.size(); ++i) {
        const Segment& seg = model.segments()[i];
        const FourierCurve& c = seg.curve;
        out << "segment " << i << "\n";
        out << "harmonics " << c.harmonics() << "\n";
        out << "reference " << format_number(c.ref().x()) << " " << format_number(c.ref().y()) << "\n";
        if (c.domain().is_full())
            out << "domain full\n";
        else
            out << "domain " << format_number(c.domain().lo()) << " "
                << format_number(c.domain().hi()) << "\n";
        out << "winding " << (seg.winding == Winding::Cw ? "cw" : "ccw") << "\n";
        if (seg.region)
            out << "region " << format_number(seg.region->point.x()) << " "
                << format_number(seg.region->point.y()) << " "
                << format_number(seg.region->normal.x()) << " "
                << format_number(seg.region->normal.y()) << "\n";
        else
            out << "region none\n";
        out << "coeffs";
        for (Eigen::Index k = 0; k < c.coeffs().size(); ++k) out << " " << format_number(c.coeffs()[k]);
        out << "\n";
    }
}

namespace {

class TokenReader {
public:
    TokenReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    // Next non-comment line split into tokens; false at end of input.
    bool next(std::vector<std::string>& tokens) {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            std::istringstream ls(line);
            tokens.clear();
            for (std::string t; ls >> t;) tokens.push_back(t);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::ParseError, source_ + ":" + std::to_string(lineno_) + ": " + what);
    }

    std::vector<std::string> expect(const char* key, std::size_t min_args) {
        std::vector<std::string> t;
        if (!next(t)) fail(std::string("unexpected end of file, expected '") + key + "'");
        if (t.front() != key) fail(std::string("expected '") + key + "', got '" + t.front() + "'");
        if (t.size() < min_args + 1) fail(std::string("too few values for '") + key + "'");
        return t;
    }

    double num(const std::string& s) const {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) fail("bad number '" + s + "'");
        return v;
    }

    long integer(const std::string& s) const {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0') fail("bad integer '" + s + "'");
        return v;
    }

private:
    std::istream& in_;
    std::string source_;
    int lineno_ = 0;
};

}  // namespace

BoundaryModel read_curves(std::istream& in, const std::string& source) {
    TokenReader rd(in, source);
    auto t = rd.expect("segments", 1);
    const long count = rd.integer(t[1]);
    if (count < 1) rd.fail("segment count must be >= 1");
    std::vector<Segment> segs;
    for (long i = 0; i < count; ++i) {
        t = rd.expect("segment", 1);
        if (rd.integer(t[1]) != i) rd.fail("segments must be numbered consecutively from 0");
        t = rd.expect("harmonics", 1);
        const long h = rd.integer(t[1]);
        if (h < 1) rd.fail("harmonics must be >= 1");
        t = rd.expect("reference", 2);
        const Vec2 ref{rd.num(t[1]), rd.num(t[2])};
        t = rd.expect("domain", 1);
        AngleDomain dom = AngleDomain::full();
        if (t[1] != "full") {
            if (t.size() != 3) rd.fail("domain needs 'full' or two angles");
            try {
                dom = AngleDomain::interval(rd.num(t[1]), rd.num(t[2]));
            } catch (const Error& err) {
                rd.fail(err.what());
            }
        }
        t = rd.expect("winding", 1);
        if (t[1] != "ccw" && t[1] != "cw") rd.fail("winding must be ccw or cw");
        const Winding w = t[1] == "cw" ? Winding::Cw : Winding::Ccw;
        t = rd.expect("region", 1);
        std::optional<HalfPlane> region;
        if (t[1] != "none") {
            if (t.size() != 5) rd.fail("region needs 'none' or four numbers");
            region = HalfPlane{{rd.num(t[1]), rd.num(t[2])}, {rd.num(t[3]), rd.num(t[4])}};
        }
        t = rd.expect("coeffs", 0);
        if (static_cast<long>(t.size()) - 1 != 4 * h + 2)
            rd.fail("expected " + std::to_string(4 * h + 2) + " coefficients");
        Eigen::VectorXd z(4 * h + 2);
        for (long k = 0; k < 4 * h + 2; ++k) z[k] = rd.num(t[k + 1]);
        segs.push_back({FourierCurve(static_cast<int>(h), std::move(z), ref, dom), region, w});
    }
    std::vector<std::string> extra;
    if (rd.next(extra)) rd.fail("unexpected trailing content");
    try {
        return BoundaryModel(std::move(segs));
    } catch (const Error& err) {
        rd.fail(err.what());
    }
}

BoundaryModel read_curves_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open curve file " + path);
    return read_curves(in, path);
}

// ----------------------------------------------------------------- summaries

double count_laps(const std::vector<StepRecord>& log, const Vec2& center) {
    if (log.size() < 2) return 0.0;
    double total = 0.0;
    Vec2 prev = log.front().x - center;
    for (std::size_t i = 1; i < log.size(); ++i) {
        const Vec2 cur = log[i].x - center;
        total += std::atan2(prev.x() * cur.y() - prev.y() * cur.x(), prev.dot(cur));
        prev = cur;
    }
    return total / kTwoPi;
}

RunSummary summarize(const Scenario& s, const std::vector<StepRecord>& log) {
    RunSummary out;
    out.min_clearance_overall = std::numeric_limits<double>::infinity();
    for (const auto& r : log) {
        if (!out.converged && std::isfinite(r.e) && std::abs(r.e) < s.converge_threshold) {
            out.converged = true;
            out.time_to_converge = r.t;
        }
        out.min_clearance_overall = std::min(out.min_clearance_overall, r.min_clearance);
        out.max_wheel_speed =
            std::max({out.max_wheel_speed, std::abs(r.command.v_L), std::abs(r.command.v_R)});
        out.infeasible = out.infeasible || r.infeasible;
        out.critical_steps += r.critical ? 1 : 0;
        out.modified_steps += r.qp_modified ? 1 : 0;
    }
    out.laps = count_laps(log, s.lap_center);
    for (const auto& f : s.fit_reports) out.fit_rms.push_back(f.rms_residual);
    return out;
}

// ------------------------------------------------------------------- writers

void write_metadata(std::ostream& out, const Scenario& s, const std::string& command) {
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, s.hash);
    out << "# command " << command << "\n";
    out << "# scenario " << s.name << "\n";
    out << "# scenario_hash " << hash << "\n";
    out << "# seed " << s.seed << "\n";
    out << "# dt " << format_number(s.dt) << "\n";
    out << "# t_end " << format_number(s.t_end) << "\n";
    out << "# k " << format_number(s.guidance.k) << " v_d " << format_number(s.guidance.v_d)
        << " e_d " << format_number(s.guidance.e_d) << " alpha " << format_number(s.cbf.alpha)
        << "\n";
    out << "# l " << format_number(s.geometry.l) << " d " << format_number(s.geometry.d)
        << " r_b " << format_number(s.geometry.r_b) << " v_m " << format_number(s.geometry.v_m)
        << "\n";
}

void write_trajectory(std::ostream& out, const std::vector<StepRecord>& log, int stride) {
    out << "t p_x p_y theta x y e v omega v_L v_R min_clearance segment_id qp_modified infeasible\n";
    for (std::size_t i = 0; i < log.size(); i += static_cast<std::size_t>(stride)) {
        const auto& r = log[i];
        out << format_number(r.t) << ' ' << format_number(r.state.p_x) << ' '
            << format_number(r.state.p_y) << ' ' << format_number(r.state.theta) << ' '
            << format_number(r.x.x()) << ' ' << format_number(r.x.y()) << ' '
            << format_number(r.e) << ' ' << format_number(r.command.v) << ' '
            << format_number(r.command.omega) << ' ' << format_number(r.command.v_L) << ' '
            << format_number(r.command.v_R) << ' ' << format_number(r.min_clearance) << ' '
            << r.segment_id << ' ' << (r.qp_modified ? 1 : 0) << ' ' << (r.infeasible ? 1 : 0)
            << '\n';
    }
}

void write_fit_report(std::ostream& out, const Scenario& s) {
    out << "segment harmonics n_points rms_residual max_residual condition_estimate\n";
    for (std::size_t i = 0; i < s.fit_reports.size(); ++i) {
        const auto& f = s.fit_reports[i];
        out << i << ' ' << s.model->segments()[i].curve.harmonics() << ' ' << f.n_points << ' '
            << format_number(f.rms_residual) << ' ' << format_number(f.max_residual) << ' '
            << format_number(f.condition_estimate) << '\n';
    }
}

void write_curve_samples(std::ostream& out, const BoundaryModel& model, int per_segment) {
    out << "segment rho x y\n";
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto& c = model.segments()[i].curve;
        const auto& dom = c.domain();
        const int n = std::max(per_segment, 2);
        std::vector<double> rho(n);
        for (int k = 0; k < n; ++k) {
            const double t = dom.is_full() ? static_cast<double>(k) / n
                                           : static_cast<double>(k) / (n - 1);
            rho[k] = wrap_two_pi(dom.lo() + t * dom.length());
        }
        std::vector<Vec2> pts(n);
        eval_curve_batch(c, rho, pts);
        for (int k = 0; k < n; ++k)
            out << i << ' ' << format_number(rho[k]) << ' ' << format_number(pts[k].x()) << ' '
                << format_number(pts[k].y()) << '\n';
    }
}

void write_field(std::ostream& out, std::span<const Vec2> points,
                 std::span<const FieldSample> samples) {
    out << "x y chi_x chi_y e segment_id\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& f = samples[i];
        out << format_number(points[i].x()) << ' ' << format_number(points[i].y()) << ' '
            << format_number(f.chi.x()) << ' ' << format_number(f.chi.y()) << ' '
            << format_number(f.e) << ' ' << f.segment_id << '\n';
    }
}

void write_summary(std::ostream& out, const RunSummary& s) {
    out << "converged " << (s.converged ? 1 : 0) << "\n";
    out << "time_to_converge " << format_number(s.time_to_converge) << "\n";
    out << "min_clearance_overall " << format_number(s.min_clearance_overall) << "\n";
    out << "max_wheel_speed " << format_number(s.max_wheel_speed) << "\n";
    out << "laps " << format_number(s.laps) << "\n";
    out << "infeasible " << (s.infeasible ? 1 : 0) << "\n";
    out << "critical_steps " << s.critical_steps << "\n";
    out << "modified_steps " << s.modified_steps << "\n";
    for (std::size_t i = 0; i < s.fit_rms.size(); ++i)
        out << "fit_rms_segment_" << i << " " << format_number(s.fit_rms[i]) << "\n";
}

}  // namespace encircle
