// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "encircle/error.hpp"
#include "encircle/scenario.hpp"
#include "encircle/sim.hpp"
#include "support.hpp"

using namespace encircle;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kRoot = ENCIRCLE_SOURCE_DIR;

struct Verdict {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double wheel_peak(const StepRecord& r) {
    return std::max(std::abs(r.command.v_L), std::abs(r.command.v_R));
}

// Cumulative signed turning angle of the control point about c.
std::vector<double> turning(const std::vector<StepRecord>& log, const Vec2& c) {
    std::vector<double> turn(log.size(), 0.0);
    for (std::size_t i = 1; i < log.size(); ++i) {
        const Vec2 a = log[i - 1].x - c, b = log[i].x - c;
        turn[i] = turn[i - 1] + std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    }
    return turn;
}

// Index range [first, last) of the final complete lap, or empty.
std::pair<std::size_t, std::size_t> last_lap(const std::vector<double>& turn) {
    const std::size_t last = turn.size() - 1;
    std::size_t first = last;
    while (first > 0 && std::abs(turn[last] - turn[first]) < kTwoPi) --first;
    if (std::abs(turn[last] - turn[first]) < kTwoPi) return {0, 0};
    return {first, last};
}

std::size_t first_converged(const std::vector<StepRecord>& log, double threshold) {
    std::size_t i = 0;
    while (i < log.size() && !(std::abs(log[i].e) < threshold)) ++i;
    return i;
}

Verdict fit_exactness() {
    Verdict v;
    const Vec2 center(1.25, -0.5);
    const double radius = 2.0;
    const auto pts = testing::circle_points(64, center, radius);
    std::vector<double> times;
    std::optional<FitResult> fit;
    for (int rep = 0; rep < 21; ++rep) {
        const auto t0 = Clock::now();
        fit.emplace(fit_segment(pts, center, 1, AngleDomain::full()));
        times.push_back(seconds_since(t0));
    }
    std::nth_element(times.begin(), times.begin() + 10, times.end());
    const double median = times[10];
    const auto& c = fit->curve;
    const double err = std::max({std::abs(c.a(1) - radius), std::abs(c.d(1) - radius),
                                 std::abs(c.b(1)), std::abs(c.c(1)), std::abs(c.e() - center.x()),
                                 std::abs(c.f() - center.y())});
    v.require(err <= 1e-8, "coefficient error " + fmt("%.3g", err));
    v.require(median < 0.010, "fit took " + fmt("%.3g", median) + " s");
    v.note("max coeff error " + fmt("%.2e", err) + " m, median fit " + fmt("%.3g", median * 1e3) +
           " ms");
    return v;
}

Verdict case1() {
    Verdict v;
    const auto sc = load_scenario(kRoot + "/scenarios/case1.json");
    const auto t0 = Clock::now();
    const auto log = run(sc.sim_setup());
    const double elapsed = seconds_since(t0);
    const double thr = sc.converge_threshold;

    // (a) Once converged, |e| ≥ thr only inside a bypass window: a stretch of
    // QP-modified steps (obstacle rows or wheel saturation on sharp turns)
    // extended by the settling time 3/(k·v_d) of the normal dynamics.
    const std::size_t conv = first_converged(log, thr);
    v.require(conv < log.size(), "never converged");
    const double settle = 3.0 / (sc.guidance.k * sc.guidance.v_d);
    double window_end = -1.0;
    std::size_t stray = 0, excursions = 0;
    bool outside = false;
    for (std::size_t i = conv; i < log.size(); ++i) {
        const auto& r = log[i];
        if (r.qp_modified) window_end = r.t + settle;
        const bool out = std::abs(r.e) >= thr;
        if (out && !outside) ++excursions;
        outside = out;
        if (out && r.t > window_end) ++stray;
    }
    v.require(stray == 0, std::to_string(stray) + " steps with |e| >= thr outside bypass windows");

    // (b), (c)
    double clear = 1e300, peak = 0.0;
    for (const auto& r : log) {
        clear = std::min(clear, r.min_clearance);
        peak = std::max(peak, wheel_peak(r));
    }
    v.require(clear >= -1e-3, "min clearance " + fmt("%.3g", clear));
    v.require(peak <= sc.geometry.v_m + 1e-9, "wheel peak " + fmt("%.17g", peak));

    // (d) a wheel at the limit before first convergence.
    bool saturated = false;
    for (std::size_t i = 0; i < std::min(conv, log.size()); ++i)
        saturated = saturated || wheel_peak(log[i]) >= sc.geometry.v_m - 1e-9;
    v.require(saturated, "no saturation during the initial transient");
    v.require(elapsed < 30.0, "runtime " + fmt("%.3g", elapsed) + " s");

    v.note("converged at t=" + fmt("%.1f", conv < log.size() ? log[conv].t : -1.0) + " s, " +
           std::to_string(excursions) + " excursions all in bypass windows=" +
           (stray == 0 ? "yes" : "no") + ", min clearance " + fmt("%.2e", clear) +
           " m, wheel peak " + fmt("%.12f", peak) + ", runtime " + fmt("%.2f", elapsed) + " s");
    return v;
}

Verdict standoff() {
    Verdict v;
    const auto sc = load_scenario(kRoot + "/scenarios/case2.json");
    const auto log = run(sc.sim_setup());
    const auto turn = turning(log, sc.lap_center);
    const auto [a, b] = last_lap(turn);
    v.require(b > a, "no complete lap");
    if (b <= a) return v;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = a; i < b; ++i) {
        sum += log[i].distance;
        ++n;
    }
    const double mean = sum / static_cast<double>(n);
    v.require(std::abs(mean - sc.guidance.e_d) <= 0.1, "mean stand-off " + fmt("%.4f", mean));
    v.note("mean polar-radius distance over the last lap " + fmt("%.4f", mean) + " m (target " +
           fmt("%.1f", sc.guidance.e_d) + ")");
    return v;
}

Verdict switching() {
    Verdict v;
    const auto sc = load_scenario(kRoot + "/scenarios/case3.json");
    const auto log = run(sc.sim_setup());
    const auto& model = *sc.model;

    // Every record maps to exactly one segment: the selected one holds the
    // point and no other region holds it strictly.
    std::size_t ambiguous = 0;
    for (const auto& r : log) {
        const auto loc = model.locate(r.x);
        int strict = 0;
        for (const auto& seg : model.segments())
            strict += seg.region && seg.region->strictly_contains(r.x) ? 1 : 0;
        if (!loc || *loc != r.segment_id || strict > 1) ++ambiguous;
    }
    v.require(ambiguous == 0, std::to_string(ambiguous) + " ambiguous records");

    const auto turn = turning(log, sc.lap_center);
    const auto [a, b] = last_lap(turn);
    v.require(b > a, "no complete lap");
    if (b <= a) return v;
    int crossings = 0;
    for (std::size_t i = a + 1; i <= b; ++i) crossings += log[i].segment_id != log[i - 1].segment_id;
    const double gap = (log[b].x - log[a].x).norm();
    double worst_e = 0.0;
    for (std::size_t i = a; i <= b; ++i) worst_e = std::max(worst_e, std::abs(log[i].e));
    v.require(crossings == 2, std::to_string(crossings) + " crossings in the last lap");
    v.require(gap < 0.05, "lap does not close: " + fmt("%.3g", gap) + " m");
    v.note(std::to_string(crossings) + " switching-line crossings in the last lap, closure gap " +
           fmt("%.2e", gap) + " m, lap max |e| " + fmt("%.3g", worst_e) + " m, " +
           std::to_string(ambiguous) + " ambiguous records");
    return v;
}

Verdict qp_oracle() {
    Verdict v;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0), ratio(0.2, 2.0), scale(0.2, 2.0);
    const int n = 2001;
    int done = 0, attempts = 0, bad_dist = 0, bad_kkt = 0, grid_better = 0;
    double worst_gap = 0.0, worst_kkt = 0.0;
    while (done < 1000) {
        ++attempts;
        RobotGeometry g;
        g.v_m = scale(gen);
        g.d = 0.3 * scale(gen);
        g.l = g.d * ratio(gen);
        QpProblem p;
        p.u_ref = 3.0 * g.v_m * Vec2(u(gen), u(gen));
        p.rows = input_rows(kTwoPi * u(gen), g);
        const int extra = static_cast<int>(attempts % 3);
        for (int j = 0; j < extra; ++j) {
            const Vec2 a(u(gen), u(gen));
            p.rows.push_back({a, 0.5 * g.v_m * a.norm() * u(gen)});
        }
        QpSolution s;
        try {
            s = solve_qp(p);
        } catch (const Error&) {
            continue;
        }
        const double half = 2.0 * g.v_m;
        const auto oracle = testing::grid_oracle(p, half, n);
        if (!oracle.feasible) continue;  // feasible set thinner than a grid cell
        ++done;
        // Every point lies within a cell diagonal of some grid node.
        const double cell = std::sqrt(2.0) * 2.0 * half / (n - 1);
        const double d = (s.u - p.u_ref).norm();
        const double gap = std::abs(d - oracle.distance);
        grid_better += oracle.distance < d - 1e-12 ? 1 : 0;
        const double kkt = testing::kkt_residual(p, s.u);
        worst_gap = std::max(worst_gap, gap / cell);
        worst_kkt = std::max(worst_kkt, kkt);
        bad_dist += gap > cell ? 1 : 0;
        bad_kkt += kkt > 1e-7 ? 1 : 0;
    }
    v.require(bad_dist == 0, std::to_string(bad_dist) + " instances off by more than a cell");
    v.require(bad_kkt == 0, std::to_string(bad_kkt) + " instances with KKT residual > 1e-7");
    v.require(grid_better == 0, std::to_string(grid_better) + " instances where the grid beats the solver");
    v.note(std::to_string(done) + " instances (" + std::to_string(attempts) +
           " drawn), worst |d - d_grid| " + fmt("%.3f", worst_gap) + " cell diagonals, grid never below solver=" +
           (grid_better == 0 ? "yes" : "no") + ", worst KKT " + fmt("%.2e", worst_kkt));
    return v;
}

Verdict invariants() {
    Verdict v;
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi), w(-6.0, 6.0);

    // Tangent against central differences.
    double worst_fd = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto c = testing::random_curve(gen, 1 + trial % 12);
        const double rho = ang(gen), h = 1e-6;
        const Vec2 t = eval_tangent(c, rho);
        if (t.norm() < 1e-3) continue;
        const Vec2 fd = (eval_curve(c, rho + h) - eval_curve(c, rho - h)) / (2 * h);
        worst_fd = std::max(worst_fd, (fd - t).norm() / t.norm());
    }
    v.require(worst_fd <= 1e-6, "tangent FD " + fmt("%.3g", worst_fd));

    // Orthogonality and speed on the case-1 field.
    const auto sc = load_scenario(kRoot + "/scenarios/case1.json");
    double worst_dot = 0.0, worst_speed = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const Vec2 q(w(gen), w(gen));
        const auto fs = vector_field(q, *sc.model, sc.guidance);
        if (fs.critical) continue;
        worst_dot = std::max(worst_dot, std::abs(fs.tau.dot(fs.n)));
        worst_speed =
            std::max(worst_speed, std::abs(reference_control(fs, sc.guidance).norm() - sc.guidance.v_d));
    }
    v.require(worst_dot <= 1e-12, "<tau,n> " + fmt("%.3g", worst_dot));
    v.require(worst_speed <= 1e-12, "|u_r| - v_d " + fmt("%.3g", worst_speed));

    // Residual is non-increasing in H.
    std::normal_distribution<double> noise(0.0, 0.05);
    auto pts = testing::lobed_points(300);
    for (auto& p : pts) p += Vec2(noise(gen), noise(gen));
    double prev = 1e300;
    bool monotone = true;
    for (int h = 1; h <= 30; ++h) {
        const double rms = fit_segment(pts, {0, 0}, h, AngleDomain::full()).report.rms_residual;
        monotone = monotone && rms <= prev + 1e-12;
        prev = rms;
    }
    v.require(monotone, "residual grew with H");

    // RK4 closes a unit circle.
    RobotState c{0, 0, 0};
    ControlCommand cmd;
    cmd.v = cmd.omega = 1.0;
    const int steps = 6283;
    for (int i = 0; i < steps; ++i) c = step(c, cmd, kTwoPi / steps);
    const double closure = std::hypot(c.p_x, c.p_y);
    v.require(closure <= 1e-6, "RK4 closure " + fmt("%.3g", closure));

    // Byte-identical reruns, through the writers.
    auto render = [] {
        auto s = load_scenario(kRoot + "/scenarios/case3.json");
        override_timing(s, std::nullopt, 30.0, std::nullopt);
        const auto log = run(s.sim_setup());
        std::ostringstream out;
        write_metadata(out, s, "acceptance");
        write_trajectory(out, log, 1);
        write_summary(out, summarize(s, log));
        return out.str();
    };
    const bool same = render() == render();
    v.require(same, "reruns differ");

    v.note("tangent FD " + fmt("%.2e", worst_fd) + ", <tau,n> " + fmt("%.1e", worst_dot) +
           ", speed " + fmt("%.1e", worst_speed) + ", H-monotone " + (monotone ? "yes" : "no") +
           ", RK4 closure " + fmt("%.1e", closure) + " m, reruns identical " + (same ? "yes" : "no"));
    return v;
}

Verdict multistart() {
    Verdict v;
    auto sc = load_scenario(kRoot + "/scenarios/case1.json");
    override_timing(sc, std::nullopt, 200.0, std::nullopt);
    std::mt19937_64 gen(20);
    std::uniform_real_distribution<double> pos(-6.0, 6.0), head(-3.14159, 3.14159);
    int converged = 0, flagged = 0, unsafe = 0;
    std::string missed;
    for (int i = 0; i < 20; ++i) {
        RobotState s0;
        for (;;) {
            s0 = {pos(gen), pos(gen), head(gen)};
            const Vec2 x = s0.control_point(sc.geometry.l);
            bool clear = x.norm() > 1e-3;
            for (const auto& o : sc.obstacles) clear = clear && barrier_value(x, o) > 0.0;
            if (clear) break;
        }
        auto setup = sc.sim_setup();
        setup.initial = s0;
        setup.seed = 1000 + static_cast<std::uint64_t>(i);
        const auto log = run(setup);
        bool ok_safety = true, critical = false;
        for (const auto& r : log) {
            ok_safety = ok_safety && !r.infeasible && r.min_clearance >= -1e-3 &&
                        wheel_peak(r) <= sc.geometry.v_m + 1e-9;
            critical = critical || r.critical;
        }
        unsafe += ok_safety ? 0 : 1;
        if (first_converged(log, sc.converge_threshold) < log.size()) {
            ++converged;
        } else {
            flagged += critical ? 1 : 0;
            missed += " (" + fmt("%.2f", s0.p_x) + "," + fmt("%.2f", s0.p_y) + ")";
        }
    }
    v.require(converged >= 18, std::to_string(converged) + "/20 converged");
    v.require(converged + flagged == 20, "a non-converged run has no critical flag");
    v.require(unsafe == 0, std::to_string(unsafe) + " runs violated safety or actuation");
    v.note(std::to_string(converged) + "/20 converged within 200 s" +
           (missed.empty() ? "" : ", missed:" + missed));
    return v;
}

}  // namespace

// --expect-fail=N,M marks criteria known to be unattainable. They still
// print FAIL; only an unexpected result changes the exit status.
int main(int argc, char** argv) {
    std::vector<int> expected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        const std::string key = "--expect-fail=";
        if (arg.rfind(key, 0) != 0) {
            std::fprintf(stderr, "usage: %s [--expect-fail=N[,M...]]\n", argv[0]);
            return 64;
        }
        std::istringstream list(arg.substr(key.size()));
        for (std::string tok; std::getline(list, tok, ',');) expected.push_back(std::stoi(tok));
    }
    struct Item {
        const char* name;
        std::function<Verdict()> check;
    };
    const std::vector<Item> items = {
        {"fit exactness (H=1 circle)", fit_exactness},
        {"case-1 reproduction", case1},
        {"stand-off e_d=3 (case 2)", standoff},
        {"switching (case 3)", switching},
        {"QP vs grid oracle", qp_oracle},
        {"invariant suites", invariants},
        {"multi-start convergence", multistart},
    };
    int unexpected = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        Verdict v;
        try {
            v = items[i].check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const bool known = std::find(expected.begin(), expected.end(), int(i + 1)) != expected.end();
        unexpected += v.pass == known ? 1 : 0;
        std::printf("%s %zu %s: %s%s\n", v.pass ? "PASS" : "FAIL", i + 1, items[i].name,
                    v.detail.c_str(),
                    known ? (v.pass ? " [expected to fail, but passed]" : " [known failure]") : "");
        std::fflush(stdout);
    }
    return unexpected;
}
