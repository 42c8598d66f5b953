#include <CLI11.hpp>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oplab/oplab.hpp"

namespace {

std::vector<int> parse_levels(const std::string& csv) {
    std::vector<int> out;
    size_t pos = 0;
    while (pos < csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(std::stoi(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

void print_checks(const std::vector<oplab::CheckRow>& rows) {
    for (const auto& r : rows)
        std::printf("  [%s] %-36s value=%.6g limit=%.6g\n", r.pass ? "ok" : "FAIL",
                    r.name.c_str(), r.value, r.limit);
}

int run_invariant_suite() {
    using namespace oplab;
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, double value, double limit) {
        std::printf("[%s] %-40s worst=%.3g limit=%.3g\n", ok ? "PASS" : "FAIL", name.c_str(),
                    value, limit);
        if (!ok) ++failures;
    };

    std::mt19937_64 rng(20240517);
    {
        double worst = 0;
        for (int t = 0; t < 1000; ++t) {
            auto inst = random_instance(rng);
            const double tv = inst.mu.total_variation();
            worst = std::max(worst, std::abs(inst.mu.load_l1() - tv) / (tv > 0 ? tv : 1));
        }
        report("mass-preservation (1000 random measures)", worst <= 1e-10, worst, 1e-10);
    }
    {
        double worst_sym = 0, worst_sign = 0;
        for (int t = 0; t < 50; ++t) {
            auto inst = random_instance(rng, true);
            const auto& k = inst.op.interior;
            double maxabs = 0;
            for (int i = 0; i < k.outerSize(); ++i)
                for (SpMatRow::InnerIterator it(k, i); it; ++it)
                    maxabs = std::max(maxabs, std::abs(it.value()));
            SpMatRow kt = SpMatRow(k.transpose());
            SpMatRow d = k - kt;
            for (int i = 0; i < d.outerSize(); ++i)
                for (SpMatRow::InnerIterator it(d, i); it; ++it)
                    worst_sym = std::max(worst_sym, std::abs(it.value()) / maxabs);
            for (int i = 0; i < k.outerSize(); ++i) {
                double diag = 0, off = 0;
                for (SpMatRow::InnerIterator it(k, i); it; ++it) {
                    if (it.col() == i) {
                        diag = it.value();
                    } else {
                        if (it.value() > 0) worst_sign = std::max(worst_sign, it.value());
                        off += std::abs(it.value());
                    }
                }
                if (diag <= 0 || diag + 1e-12 * maxabs < off)
                    worst_sign = std::max(worst_sign, off - diag);
            }
        }
        report("operator symmetry (50 random coefficients)", worst_sym <= 1e-14, worst_sym, 1e-14);
        report("operator sign pattern / dominance", worst_sign <= 0, worst_sign, 0);
    }
    {
        double worst = 0;
        std::uniform_real_distribution<double> unit(-3.0, 3.0);
        for (int t = 0; t < 100; ++t) {
            auto inst = random_instance(rng);
            std::vector<double> f(inst.dom->node_count());
            for (auto& v : f) v = unit(rng);
            const double c = unit(rng);
            std::vector<double> cf(f.size());
            for (size_t i = 0; i < f.size(); ++i) cf[i] = c * f[i];
            for (auto spec : {NormSpec::h10(), NormSpec::h1(), NormSpec::w1q(1.4),
                              NormSpec::lp(2.0), NormSpec::linf()}) {
                const double a = norm(cf, spec, inst.dom);
                const double b = std::abs(c) * norm(f, spec, inst.dom);
                worst = std::max(worst, std::abs(a - b) / (b > 0 ? b : 1));
            }
        }
        report("norm homogeneity (100 random fields)", worst <= 1e-12, worst, 1e-12);
    }
    {
        bool ok = true;
        for (int t = 0; t < 20; ++t) {
            auto inst = random_instance(rng, true);
            ok = ok && all_pass(check_comparison(inst.op, inst.mu, inst.psi));
            const auto sol = solve_vi(inst.op, inst.mu, inst.psi);
            ok = ok && all_pass(check_solution_invariants(inst.op, inst.mu, inst.psi, sol));
        }
        report("comparison + solution invariants (20 runs)", ok, ok ? 0 : 1, 0);
    }
    {
        double worst = 0;
        for (int t = 0; t < 30; ++t) {
            auto inst = random_instance(rng);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            auto nu = atom_at(inst.dom, (0.2 + 0.6 * unit(rng)) * inst.dom->length_x,
                              0.5 * unit(rng), false,
                              inst.dom->kind == MeshKind::Grid2d
                                  ? (0.2 + 0.6 * unit(rng)) * inst.dom->length_y
                                  : 0.0);
            auto [a, b] = shift_solve(inst.op, inst.mu, nu, inst.psi);
            for (size_t i = 0; i < a.u.size(); ++i)
                worst = std::max(worst, std::abs(a.u[i] - b.u[i]) / a.scale);
        }
        report("shift identity (30 random instances)", worst <= 1e-8, worst, 1e-8);
    }
    {
        bool ok = true;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int t = 0; t < 25; ++t) {
            auto inst = random_instance(rng);
            std::vector<double> osc(inst.dom->node_count());
            for (auto& v : osc) v = 2 * unit(rng) - 1;
            auto row = check_uniform_stability(inst.op, inst.mu, inst.psi, osc,
                                               0.3 * unit(rng));
            ok = ok && row.pass;
        }
        report("uniform stability (25 random draws)", ok, ok ? 0 : 1, 0);
    }
    {
        bool ok = true;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int t = 0; t < 25; ++t) {
            auto inst = random_instance(rng, true);
            std::vector<double> pert(inst.dom->node_count(), 0.0);
            for (int n = 0; n < inst.dom->node_count(); ++n)
                if (inst.dom->is_interior(n))
                    pert[n] = 0.2 * unit(rng) *
                              std::sin(3 * inst.dom->coord_x(n) + inst.dom->coord_y(n));
            auto row = check_energy_stability(inst.op, inst.mu, inst.psi, pert);
            ok = ok && row.pass;
        }
        report("energy stability (25 random draws)", ok, ok ? 0 : 1, 0);
    }
    {
        bool ok = true;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto dom = build_grid2d(1.0, 1.0, 20, 20);
        CapacityContext ctx(dom);
        for (int t = 0; t < 60; ++t) {
            std::vector<int> e, f;
            for (int n = 0; n < dom->node_count(); ++n) {
                if (!dom->is_interior(n)) continue;
                const double r = unit(rng);
                if (r < 0.12) e.push_back(n);
                if (r < 0.2) f.push_back(n);  // e subset f
            }
            const double ce = cached_capacity(ctx, e);
            const double cf = cached_capacity(ctx, f);
            std::vector<int> uni = f;
            const double cu = cached_capacity(ctx, uni);
            ok = ok && ce <= cf * (1 + 1e-9) + 1e-9 && cu <= ce + cf + 1e-9;
        }
        report("capacity monotonicity + subadditivity (60 pairs)", ok, ok ? 0 : 1, 0);
    }
    {
        bool ok = true;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            auto inst = random_instance(rng);
            auto nu1 = scale_measure(
                discretize_measure(inst.dom, {},
                                   make_density("bump", {{"amp", unit(rng)},
                                                         {"lx", inst.dom->length_x},
                                                         {"ly", inst.dom->kind == MeshKind::Grid2d
                                                                    ? inst.dom->length_y
                                                                    : 0.0}})),
                1.0);
            auto w1 = solve_linear(inst.op, add_measures(inst.mu, nu1));
            auto w2 = solve_linear(inst.op, inst.mu);
            try {
                lattice_min(w1, w2, inst.op, inst.mu);
            } catch (const Error&) {
                ok = false;
            }
        }
        report("lattice minimum of supersolutions (50 pairs)", ok, ok ? 0 : 1, 0);
    }
    std::printf("%s\n", failures == 0 ? "invariant suite: all pass" : "invariant suite: FAILURES");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"obstacle-problem laboratory"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "list available scenarios");

    std::string scenario_id, levels_csv, out_dir, config_file;
    auto* run_cmd = app.add_subcommand("run", "run one scenario");
    run_cmd->add_option("--scenario", scenario_id, "scenario id");
    run_cmd->add_option("--levels", levels_csv, "comma-separated mesh levels");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--config", config_file, "JSON config written by a previous run");

    std::string all_out;
    auto* all_cmd = app.add_subcommand("run-all", "run every scenario");
    all_cmd->add_option("--out", all_out, "output directory");

    std::string suite;
    auto* check_cmd = app.add_subcommand("check", "run a verification suite");
    check_cmd->add_option("--suite", suite, "suite name (invariants)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (list_cmd->parsed()) {
            std::printf("%-20s %s\n", "id", "summary");
            for (const auto& s : oplab::scenario_registry())
                std::printf("%-20s %s\n", s.id.c_str(), s.claim.c_str());
            return 0;
        }
        if (run_cmd->parsed()) {
            std::vector<int> levels;
            if (!config_file.empty()) {
                auto j = oplab::json::parse(oplab::read_text(config_file));
                if (j.contains("config")) j = j.at("config");  // a report embeds its config
                if (scenario_id.empty()) scenario_id = j.at("id").get<std::string>();
                if (levels_csv.empty())
                    for (const auto& l : j.at("levels")) levels.push_back(l.get<int>());
            }
            if (!levels_csv.empty()) levels = parse_levels(levels_csv);
            if (scenario_id.empty()) {
                std::fprintf(stderr, "run needs --scenario or --config\n");
                return 2;
            }
            const auto rep = oplab::run_scenario(scenario_id, levels, out_dir);
            std::printf("scenario %s: %s (%s)\n", rep.id.c_str(), rep.pass ? "pass" : "fail",
                        rep.label.c_str());
            for (const auto& row : rep.rows) {
                std::printf(" level %d\n", row.level);
                print_checks(row.checks);
            }
            print_checks(rep.final_checks);
            return rep.pass ? 0 : 1;
        }
        if (all_cmd->parsed()) {
            const bool ok = oplab::run_all(all_out);
            std::printf("run-all: %s\n", ok ? "pass" : "fail");
            return ok ? 0 : 1;
        }
        if (check_cmd->parsed()) {
            if (suite != "invariants") {
                std::fprintf(stderr, "unknown suite '%s'\n", suite.c_str());
                return 2;
            }
            return run_invariant_suite();
        }
    } catch (const oplab::UnknownScenario& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
