// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
// argv[1] (optional): path to the oplab CLI, used by the determinism check;
// without it the check runs in-process.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oplab/oplab.hpp"

using namespace oplab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %02d %-22s %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

DiscreteMeasure random_nonneg_measure(const DomainPtr& dom, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Atom> atoms;
    const int n = 1 + static_cast<int>(unit(rng) * 2);
    for (int k = 0; k < n; ++k)
        atoms.push_back(Atom{(0.1 + 0.8 * unit(rng)) * dom->length_x,
                             dom->kind == MeshKind::Grid2d
                                 ? (0.1 + 0.8 * unit(rng)) * dom->length_y
                                 : 0.0,
                             unit(rng), false});
    return discretize_measure(dom, atoms,
                              make_density("bump", {{"amp", 0.5 * unit(rng)},
                                                    {"lx", dom->length_x},
                                                    {"ly", dom->kind == MeshKind::Grid2d
                                                               ? dom->length_y
                                                               : 0.0}}));
}

// 1. shift identity on 200 random instances, under 60 s
void criterion_shift() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
        auto inst = random_instance(rng);
        auto nu = random_nonneg_measure(inst.dom, rng);
        auto [a, b] = shift_solve(inst.op, inst.mu, nu, inst.psi);
        const double scale = std::max(a.scale, b.scale);
        for (size_t i = 0; i < a.u.size(); ++i)
            worst = std::max(worst, std::abs(a.u[i] - b.u[i]) / scale);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    verdict(1, "shift-identity", worst <= 1e-8 && secs < 60,
            "max relative discrepancy " + fmt(worst) + " (limit 1e-8), " + fmt(secs) + " s");
}

// 2. closed-form obstacle instance at M = 400
void criterion_closed_form() {
    const double xs = std::sqrt(0.02);
    auto dom = build_interval(1.0, 400);
    auto op = assemble_operator(dom, constant_coefficient(1.0));
    auto mu = discretize_measure(dom, {}, make_density("constant", {{"value", -1.0}}));
    auto sol = solve_vi(op, mu, constant_obstacle(dom, -0.01), tuned_config(*dom));
    const double probe = interpolate(*dom, sol.u, 0.1);
    const double mass = reaction_norm(sol);
    const bool ok = std::abs(probe - (-0.009142)) <= 1e-4 &&
                    std::abs(mass - 0.717157) <= 0.01 * 0.717157 && mass <= 1.0 * (1 + 1e-6);
    verdict(2, "closed-form-vi", ok,
            "u(0.1) = " + fmt(probe) + " (want -0.009142 +- 1e-4), reaction " + fmt(mass) +
                " (want 0.717157 +- 1%, <= 1), xs = " + fmt(xs));
}

// 3. kernel reproduction and convergence order
void criterion_green() {
    const GreenBall gb(3, 1.0);
    bool ok = true;
    std::string detail;
    std::vector<double> errs;
    for (int m : {100, 200, 400}) {
        auto dom = build_radial_mesh(3, 1.0, m);
        auto op = assemble_operator(dom, constant_coefficient(1.0));
        auto u = solve_linear(op, atom_at(dom, 0.0, 1.0));
        errs.push_back(std::abs(interpolate(*dom, u, 0.5) - gb.value(0.5)));
        if (m == 400) {
            for (double r : {0.25, 0.5, 0.75}) {
                const double rel = std::abs(interpolate(*dom, u, r) - gb.value(r)) / gb.value(r);
                ok = ok && rel <= 0.02;
                detail += "err(" + fmt(r) + ") = " + fmt(rel) + "  ";
            }
        }
    }
    const double order = std::log2(errs[1] / errs[2]);
    ok = ok && order >= 0.9;
    verdict(3, "green-reproduction", ok, detail + "order " + fmt(order) + " (>= 0.9)");
}

// 4. collapse of the point-mass instance under refinement
void criterion_nomosco() {
    const GreenBall gb(3, 1.0);
    std::vector<double> probes;
    double limit_probe = 0;
    for (int m : {200, 400, 800}) {
        auto dom = build_radial_mesh(3, 1.0, m);
        auto op = assemble_operator(dom, constant_coefficient(1.0));
        auto mu = atom_at(dom, 0.0, -1.0, true);
        auto sol = solve_vi(op, mu, constant_obstacle(dom, -5.0), tuned_config(*dom));
        probes.push_back(std::abs(interpolate(*dom, sol.u, 0.5)));
        if (m == 800) limit_probe = interpolate(*dom, solve_linear(op, mu), 0.5);
    }
    const double r1 = probes[1] / probes[0];
    const double r2 = probes[2] / probes[1];
    const bool ratios_ok = r1 >= 0.4 && r1 <= 0.65 && r2 >= 0.4 && r2 <= 0.65;
    const bool limit_ok = std::abs(limit_probe - (-gb.value(0.5))) <= 0.01 * gb.value(0.5);
    verdict(4, "instability-collapse", ratios_ok && limit_ok,
            "halving ratios " + fmt(r1) + ", " + fmt(r2) + " (in [0.4, 0.65]); limit probe " +
                fmt(limit_probe) + " (want -0.0795775 +- 1%)");
}

// 5. two-layer counterexample at the finest level
void criterion_menodelta() {
    const GreenBall gb(3, 1.0);
    auto dom = build_radial_mesh(3, 1.0, 800);
    auto op = assemble_operator(dom, constant_coefficient(1.0));
    auto kernel = solve_linear(op, atom_at(dom, 0.0, 1.0));
    auto mu = atom_at(dom, 0.0, -1.0, true);
    auto psi = make_obstacle(dom, sandwich_field(*dom, make_sandwich(5, gb), kernel));
    auto sol = solve_vi(op, mu, psi, tuned_config(*dom));
    std::vector<double> neg(kernel.size());
    for (size_t i = 0; i < kernel.size(); ++i) neg[i] = -kernel[i];
    auto limit_sol = solve_vi(op, mu, make_obstacle(dom, neg), tuned_config(*dom));

    const double p = interpolate(*dom, sol.u, 0.5);
    const double lp = interpolate(*dom, limit_sol.u, 0.5);
    const double target = -1.0 / (8 * std::numbers::pi_v<double>);
    const bool probe_ok = std::abs(p - target) <= 0.05 * std::abs(target);
    const bool gap_ok = std::abs(p - lp) >= 0.03;

    std::vector<std::vector<double>> family;
    for (int n = 1; n <= 6; ++n)
        family.push_back(sandwich_field(*dom, make_sandwich(n, gb), kernel));
    auto verdict_ls = check_levelset_convergence(dom, family, neg,
                                                 default_probe(*dom, family, neg));
    const bool ls_ok = verdict_ls.verdict == LevelSetVerdict::Converges;
    verdict(5, "two-layer-counterexample", probe_ok && gap_ok && ls_ok,
            "probe " + fmt(p) + " (want " + fmt(target) + " +- 5%), gap " + fmt(std::abs(p - lp)) +
                " (>= 0.03), checker " + to_string(verdict_ls.verdict));
}

// 6. uniform stability over 100 random draws with boundary data
void criterion_uniform() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int violations = 0;
    double worst_margin = 0;
    for (int t = 0; t < 100; ++t) {
        auto inst = random_instance(rng);
        BoundaryData g = BoundaryData::zero(inst.dom);
        for (int n = 0; n < inst.dom->node_count(); ++n)
            g.values[n] = 0.4 * unit(rng);
        Obstacle psi2 = inst.psi;
        double c = 0;
        for (int n = 0; n < inst.dom->node_count(); ++n) {
            if (psi2.values[n] == kUnconstrained || !inst.dom->is_interior(n)) continue;
            const double d = 0.3 * (2 * unit(rng) - 1);
            psi2.values[n] += d;
            c = std::max(c, std::abs(d));
        }
        auto a = solve_op_g(inst.op, inst.mu, g, inst.psi);
        auto b = solve_op_g(inst.op, inst.mu, g, psi2);
        double diff = 0;
        for (size_t i = 0; i < a.u.size(); ++i)
            diff = std::max(diff, std::abs(a.u[i] - b.u[i]));
        const double allowed = c + 1e-8 * std::max(a.scale, b.scale);
        if (diff > allowed) ++violations;
        worst_margin = std::max(worst_margin, diff - c);
    }
    verdict(6, "uniform-stability", violations == 0,
            std::to_string(violations) + " violations in 100 draws (worst overshoot " +
                fmt(worst_margin) + ")");
}

// 7. energy-norm stability ratio over 100 draws
void criterion_energy() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int violations = 0;
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        auto inst = random_instance(rng, t % 2 == 1);  // alternate unit / piecewise in [1,4]
        std::vector<double> pert(inst.dom->node_count(), 0.0);
        for (int n = 0; n < inst.dom->node_count(); ++n)
            if (inst.dom->is_interior(n))
                pert[n] = 0.2 * unit(rng) *
                          std::sin(5 * inst.dom->coord_x(n) + 2 * inst.dom->coord_y(n));
        auto row = check_energy_stability(inst.op, inst.mu, inst.psi, pert);
        if (!row.pass) ++violations;
        worst = std::max(worst, row.value / row.limit);
    }
    verdict(7, "energy-stability", violations == 0,
            std::to_string(violations) + " violations in 100 draws (worst ratio/limit " +
                fmt(worst) + ")");
}

// 8. truncation energy bound over 50 random measures
void criterion_truncation() {
    std::mt19937_64 rng(808);
    int violations = 0;
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        auto inst = random_instance(rng);  // unit coefficient
        auto u = solve_linear(inst.op, inst.mu);
        double sup = 0;
        for (double v : u) sup = std::max(sup, std::abs(v));
        const double mass = inst.mu.load_l1();
        for (double frac : {0.1, 0.25, 0.5, 0.75, 1.0}) {
            const double k = frac * sup;
            if (k <= 0) continue;
            const double lhs = h10_energy_squared(*inst.dom, truncate(u, k));
            if (lhs > 1.01 * k * mass + 1e-12) ++violations;
            worst = std::max(worst, lhs / (k * mass));
        }
    }
    verdict(8, "truncation-energy", violations == 0,
            std::to_string(violations) + " violations over the k-grid (worst ratio " + fmt(worst) +
                ", limit 1.01)");
}

// 9. threshold datum: norm traces and mass
void criterion_orsina() {
    auto rep = run_scenario("orsina");
    bool w14 = false, mass = false;
    bool w16 = true;
    for (const auto& row : rep.final_checks) {
        if (row.name == "w14-stabilizes") w14 = row.pass;
        if (row.name == "datum-mass-1pct") mass = row.pass;
        if (row.name.rfind("w16-grows-20pct", 0) == 0) w16 = w16 && row.pass;
    }
    const double g0 = rep.summary.count("w16_growth_0") ? rep.summary.at("w16_growth_0") : 0;
    const double g1 = rep.summary.count("w16_growth_1") ? rep.summary.at("w16_growth_1") : 0;
    verdict(9, "threshold-datum", w14 && mass && w16,
            std::string("w14 stabilizes: ") + (w14 ? "yes" : "no") + ", mass 1%: " +
                (mass ? "yes" : "no") + ", w16 growth " + fmt(g0) + "/" + fmt(g1) +
                " (need >= 1.2 per step)");
}

// 10. capacity properties and disk self-consistency
void criterion_capacity() {
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto dom = build_grid2d(1.0, 1.0, 20, 20);
    CapacityContext ctx(dom);
    int violations = 0;
    for (int t = 0; t < 500; ++t) {
        std::vector<int> e, f, u;
        for (int n = 0; n < dom->node_count(); ++n) {
            if (!dom->is_interior(n)) continue;
            const double r = unit(rng);
            if (r < 0.1) e.push_back(n);
            if (r >= 0.1 && r < 0.18) f.push_back(n);
        }
        u = e;
        u.insert(u.end(), f.begin(), f.end());
        const double ce = cached_capacity(ctx, e);
        const double cf = cached_capacity(ctx, f);
        const double cu = cached_capacity(ctx, u);
        if (cu > ce + cf + 1e-9) ++violations;
        if (ce > cu * (1 + 1e-9) + 1e-9) ++violations;
    }
    std::vector<double> disk;
    for (int m : {64, 128, 256}) {
        auto gdom = build_grid2d(1.0, 1.0, m, m);
        CapacityContext gctx(gdom);
        std::vector<int> e;
        for (int n = 0; n < gdom->node_count(); ++n) {
            if (!gdom->is_interior(n)) continue;
            const double dx = gdom->coord_x(n) - 0.5, dy = gdom->coord_y(n) - 0.5;
            if (dx * dx + dy * dy <= 0.25 * 0.25) e.push_back(n);
        }
        disk.push_back(capacity(gctx, e).value);
    }
    const double d1 = std::abs(disk[1] - disk[0]) / disk[1];
    const double d2 = std::abs(disk[2] - disk[1]) / disk[2];
    verdict(10, "capacity-properties", violations == 0 && d1 <= 0.02 && d2 <= 0.02,
            std::to_string(violations) + " violations in 500 pairs; disk trace " + fmt(disk[0]) +
                " / " + fmt(disk[1]) + " / " + fmt(disk[2]) + " (steps " + fmt(d1) + ", " +
                fmt(d2) + " <= 2%)");
}

// 11. level-set checker classifications
void criterion_checker() {
    auto dom = build_radial_mesh(3, 1.0, 400);
    auto op = assemble_operator(dom, constant_coefficient(1.0));
    auto kernel = solve_linear(op, atom_at(dom, 0.0, 1.0));
    const GreenBall gb(3, 1.0);

    std::vector<std::vector<double>> sinking;
    for (int n = 1; n <= 8; ++n)
        sinking.push_back(std::vector<double>(dom->node_count(), -double(n)));
    std::vector<double> unconstrained(dom->node_count(), kUnconstrained);
    auto v1 = check_levelset_convergence(dom, sinking, unconstrained,
                                         default_probe(*dom, sinking, unconstrained));

    std::vector<std::vector<double>> layered;
    for (int n = 1; n <= 6; ++n)
        layered.push_back(sandwich_field(*dom, make_sandwich(n, gb), kernel));
    std::vector<double> neg(kernel.size());
    for (size_t i = 0; i < kernel.size(); ++i) neg[i] = -kernel[i];
    auto v2 = check_levelset_convergence(dom, layered, neg, default_probe(*dom, layered, neg));

    std::vector<double> fixed(dom->node_count());
    for (int i = 0; i < dom->node_count(); ++i) fixed[i] = -0.5 - dom->coord_x(i);
    std::vector<std::vector<double>> constant(6, fixed);
    auto v3 = check_levelset_convergence(dom, constant, fixed,
                                         default_probe(*dom, constant, fixed));
    bool zero_slack = v3.verdict == LevelSetVerdict::Converges;
    for (const auto& e : v3.entries)
        for (double c : e.family_t_inner) zero_slack = zero_slack && c == e.cap_limit_t_inner;

    const bool ok = v1.verdict == LevelSetVerdict::ConvergesToMinusInfinity &&
                    v2.verdict == LevelSetVerdict::Converges && zero_slack;
    verdict(11, "levelset-classifications", ok,
            "sinking: " + to_string(v1.verdict) + ", two-layer: " + to_string(v2.verdict) +
                ", constant: " + to_string(v3.verdict) +
                (zero_slack ? " (zero slack)" : " (slack unexpected)"));
}

// 12. byte-identical reports from repeated run-all (timing fields excluded)
void criterion_determinism(const std::string& cli) {
    const auto base = fs::temp_directory_path() / "oplab_acceptance";
    fs::remove_all(base);
    const auto d1 = base / "a", d2 = base / "b";
    if (!cli.empty()) {
        const std::string q = "\"" + cli + "\" run-all --out ";
        std::system((q + d1.string() + " > /dev/null 2>&1").c_str());
        std::system((q + d2.string() + " > /dev/null 2>&1").c_str());
    }
    if (cli.empty() || !fs::exists(d1 / "summary.json")) {
        run_all(d1);
        run_all(d2);
    }
    bool ok = true;
    std::string first_diff;
    for (const auto& entry : fs::recursive_directory_iterator(d1)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), d1);
        const auto other = d2 / rel;
        if (!fs::exists(other)) {
            ok = false;
            first_diff = rel.string() + " missing";
            break;
        }
        std::string a = read_text(entry.path());
        std::string b = read_text(other);
        if (entry.path().filename() == "report.json") {
            json ja = json::parse(a), jb = json::parse(b);
            ja.erase("runtime_ms");
            jb.erase("runtime_ms");
            a = ja.dump();
            b = jb.dump();
        }
        if (a != b) {
            ok = false;
            first_diff = rel.string();
            break;
        }
    }
    verdict(12, "run-all-determinism", ok,
            ok ? (cli.empty() ? "in-process double run byte-identical"
                              : "CLI double run byte-identical")
               : "first difference: " + first_diff);
    fs::remove_all(base);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    criterion_shift();
    criterion_closed_form();
    criterion_green();
    criterion_nomosco();
    criterion_menodelta();
    criterion_uniform();
    criterion_energy();
    criterion_truncation();
    criterion_orsina();
    criterion_capacity();
    criterion_checker();
    criterion_determinism(cli);
    std::printf("%d of 12 criteria passed\n", 12 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
