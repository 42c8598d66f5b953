#include <catch2/catch.hpp>

#include <filesystem>

#include "oplab/oplab.hpp"

using namespace oplab;

TEST_CASE("scenario registry", "[scenarios]") {
    const auto& reg = scenario_registry();
    CHECK(reg.size() >= 11);
    for (const auto& s : reg) {
        CHECK_FALSE(s.id.empty());
        CHECK_FALSE(s.claim.empty());
        CHECK_FALSE(s.default_levels.empty());
    }
    CHECK_THROWS_AS(find_scenario("no-such-thing"), UnknownScenario);
    CHECK(find_scenario("menodelta").id == "menodelta");
}

TEST_CASE("measure serialization round-trip", "[io]") {
    auto dom = build_grid2d(1.0, 1.0, 8, 8);
    auto mu = discretize_measure(dom, {Atom{0.25, 0.75, -0.5, true}, Atom{0.5, 0.5, 1.25, false}},
                                 make_density("fourier", {{"amp", 0.3}, {"kx", 2}, {"ky", 1},
                                                          {"lx", 1}, {"ly", 1}, {"phase", 0.1}}));
    const json j = measure_to_json(mu);
    CHECK(j.at("atoms").size() == 2);
    CHECK(j.at("atoms")[0].at("singular").get<bool>());
    CHECK(j.at("density").get<std::string>() == "fourier");

    auto back = measure_from_json(dom, j);
    REQUIRE(back.loads.size() == mu.loads.size());
    for (size_t i = 0; i < mu.loads.size(); ++i)
        CHECK(back.loads[i] == Approx(mu.loads[i]).margin(1e-15));
    CHECK(back.total_variation() == Approx(mu.total_variation()).margin(1e-14));
}

TEST_CASE("field and solution files", "[io]") {
    auto dom = build_interval(1.0, 8);
    std::vector<double> f(dom->node_count(), 0.5);
    const std::string csv = field_to_csv(*dom, f);
    CHECK(csv.rfind("x,value\n", 0) == 0);

    auto grid = build_grid2d(1.0, 1.0, 4, 4);
    std::vector<double> g(grid->node_count(), 1.0);
    CHECK(field_to_csv(*grid, g).rfind("x,y,value\n", 0) == 0);

    auto op = assemble_operator(dom, constant_coefficient(1.0));
    auto sol = solve_vi(op, discretize_measure(dom, {}, make_density("constant", {{"value", -1.0}})),
                        constant_obstacle(dom, -0.05));
    const auto dir = std::filesystem::temp_directory_path() / "oplab_io_test";
    std::filesystem::remove_all(dir);
    const json meta = write_solution(dir, "sol", *dom, sol);
    CHECK(meta.at("u").get<std::string>() == "sol_u.csv");
    CHECK(std::filesystem::exists(dir / "sol_u.csv"));
    CHECK(std::filesystem::exists(dir / "sol_lambda.csv"));
    CHECK(std::filesystem::exists(dir / "sol.json"));
    CHECK(meta.at("reaction_mass").get<double>() == Approx(reaction_norm(sol)));
    std::filesystem::remove_all(dir);
}

TEST_CASE("verdict serialization", "[io][levelset]") {
    auto dom = build_radial_mesh(3, 1.0, 64);
    std::vector<std::vector<double>> family;
    for (int n = 1; n <= 4; ++n)
        family.push_back(std::vector<double>(dom->node_count(), -double(n)));
    std::vector<double> limit(dom->node_count(), kUnconstrained);
    auto verdict = check_levelset_convergence(dom, family, limit,
                                              default_probe(*dom, family, limit));
    const json j = verdict_to_json(verdict);
    CHECK(j.at("verdict").get<std::string>() == "converges-to-minus-infinity");
    CHECK(j.at("entries").is_array());
    const std::string csv = verdict_trace_csv(verdict);
    CHECK(csv.rfind("n,t,box,cap\n", 0) == 0);
}

TEST_CASE("scenario reports are reproducible and serializable", "[scenarios][determinism]") {
    auto rep1 = run_scenario("rhoenne", {32, 64});
    auto rep2 = run_scenario("rhoenne", {32, 64});
    json a = report_to_json(rep1), b = report_to_json(rep2);
    a.erase("runtime_ms");
    b.erase("runtime_ms");
    CHECK(a.dump() == b.dump());
    CHECK(rep1.pass);
    CHECK(rep1.config.at("id").get<std::string>() == "rhoenne");
    const std::string csv = report_trace_csv(rep1);
    CHECK(csv.rfind("level,quantity,value\n", 0) == 0);
}

TEST_CASE("scenario output directory layout", "[scenarios][io]") {
    const auto dir = std::filesystem::temp_directory_path() / "oplab_scen_test";
    std::filesystem::remove_all(dir);
    auto rep = run_scenario("mu-k-sequence", {32}, dir);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "trace.csv"));
    const json back = json::parse(read_text(dir / "report.json"));
    CHECK(back.at("id").get<std::string>() == "mu-k-sequence");
    CHECK(back.at("verdict").get<std::string>() == (rep.pass ? "pass" : "fail"));
    std::filesystem::remove_all(dir);
}
