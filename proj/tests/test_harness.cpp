#include "linksched/errors.hpp"
#include "linksched/harness.hpp"
#include "linksched/io.hpp"

#include <doctest.h>

#include <cmath>

using namespace linksched;
using namespace linksched::harness;

namespace {

Micros us(std::int64_t v)
{
    return Micros{v};
}

SweepSpec small_spec()
{
    SweepSpec spec;
    for (int i = 0; i < 3; ++i)
        spec.connections.push_back(
            {.id = i + 1, .sender = i + 1, .receiver = i + 4, .packet_count = 10, .packet_airtime = us(23)});
    spec.windows = {us(900), us(1700), us(2600)};
    spec.seeds = {1, 2, 3, 4};
    spec.replication = 2;
    return spec;
}

} // namespace

TEST_CASE("default windows and seeds")
{
    std::vector<sched::ConnectionSpec> conns;
    for (int i = 0; i < 3; ++i)
        conns.push_back({.id = i + 1, .sender = i + 1, .receiver = i + 4, .packet_count = 50, .packet_airtime = us(23)});
    const auto w = default_windows(conns, MacTiming{});
    REQUIRE(w.size() == 16);
    CHECK(w.front() == us(4253));
    CHECK(w.back() == us(30375));
    for (std::size_t i = 1; i < w.size(); ++i)
        CHECK(w[i] > w[i - 1]);

    const auto seeds = default_seeds();
    REQUIRE(seeds.size() == 30);
    CHECK(seeds.front() == 1);
    CHECK(seeds.back() == 30);
}

TEST_CASE("sweep shape and pooled metrics")
{
    const auto spec = small_spec();
    const auto result = run_sweep(spec);
    REQUIRE(result.cells.size() == 6);
    CHECK(result.connection_ids == std::vector<int>{1, 2, 3});
    CHECK(result.durations == std::vector<Micros>(3, us(810)));

    for (std::size_t i = 0; i < result.cells.size(); ++i)
    {
        const auto& cell = result.cells[i];
        CHECK(cell.window == spec.windows[i / 2]);
        CHECK(cell.strategy == (i % 2 == 0 ? Strategy::tsgs : Strategy::random));
        REQUIRE(cell.runs.size() == 8);

        std::int64_t sent = 0, delivered = 0, collided = 0, mmp = 0;
        for (const auto& c : cell.connections)
        {
            sent += c.sent;
            delivered += c.delivered;
            collided += c.collided;
            mmp += c.mmp;
        }
        std::int64_t run_sent = 0;
        for (const auto& r : cell.runs)
        {
            run_sent += r.sent;
            const double pdr = static_cast<double>(r.delivered) / r.sent;
            CHECK(pdr >= cell.pdr_min);
            CHECK(pdr <= cell.pdr_max);
        }
        CHECK(run_sent == sent);
        CHECK(cell.pdr == static_cast<double>(delivered) / static_cast<double>(sent));
        CHECK(cell.collision_ratio == static_cast<double>(collided) / static_cast<double>(sent));
        CHECK(cell.mmp_ratio == static_cast<double>(mmp) / static_cast<double>(sent));

        // Every tsgs run uses the same schedule, and it respects the window.
        if (cell.strategy == Strategy::tsgs)
            for (const auto& r : cell.runs)
            {
                CHECK(r.start_times == cell.runs.front().start_times);
                for (std::size_t c = 0; c < r.start_times.size(); ++c)
                    CHECK(r.start_times[c] + result.durations[c] <= cell.window);
            }
    }
}

TEST_CASE("averages are the plain mean of per-window rows")
{
    const auto result = run_sweep(small_spec());
    for (Strategy s : {Strategy::tsgs, Strategy::random})
    {
        double pdr = 0, coll = 0, mmp = 0;
        const auto cells = result.cells_for(s);
        for (const auto* c : cells)
        {
            pdr += c->pdr;
            coll += c->collision_ratio;
            mmp += c->mmp_ratio;
        }
        const auto* avg = result.averages_for(s);
        REQUIRE(avg);
        CHECK(avg->average_pdr == pdr / static_cast<double>(cells.size()));
        CHECK(avg->average_collision_ratio == coll / static_cast<double>(cells.size()));
        CHECK(avg->average_mmp_ratio == mmp / static_cast<double>(cells.size()));
    }
}

TEST_CASE("sweeps are reproducible")
{
    const auto a = run_sweep(small_spec());
    const auto b = run_sweep(small_spec());
    CHECK(a == b);
    CHECK(io::canonical(io::sweep_result_to_json(a)) == io::canonical(io::sweep_result_to_json(b)));
}

TEST_CASE("per-seed averages line up with the pooled average")
{
    const auto result = run_sweep(small_spec());
    const auto per_seed = per_seed_average_pdr(result, Strategy::random);
    REQUIRE(per_seed.size() == 4);
    // Every run sends the same number of packets, so the mean of per-seed
    // ratios equals the pooled ratio.
    double mean = 0;
    for (double v : per_seed)
        mean += v;
    mean /= 4;
    CHECK(mean == doctest::Approx(result.averages_for(Strategy::random)->average_pdr).epsilon(1e-12));
}

TEST_CASE("infeasible windows stop the sweep before any run")
{
    auto spec = small_spec();
    spec.windows = {us(100), us(5000)};
    CHECK_THROWS_AS(run_sweep(spec), DomainError);
}

TEST_CASE("sweep spec validation")
{
    auto spec = small_spec();
    spec.windows.clear();
    CHECK_THROWS_AS(run_sweep(spec), InputError);
    spec = small_spec();
    spec.windows = {us(2000), us(1000)};
    CHECK_THROWS_AS(spec.validate(), InputError);
    spec = small_spec();
    spec.seeds.clear();
    CHECK_THROWS_AS(spec.validate(), InputError);
    spec = small_spec();
    spec.replication = 0;
    CHECK_THROWS_AS(spec.validate(), InputError);
    spec = small_spec();
    spec.strategies.clear();
    CHECK_THROWS_AS(spec.validate(), InputError);
    CHECK_THROWS_AS(parse_strategy("greedy"), InputError);
    CHECK(parse_strategy("random") == Strategy::random);
}

TEST_CASE("comparison arithmetic")
{
    SweepResult r;
    r.averages = {{Strategy::tsgs, 0.95, 0.0101, 0.036}, {Strategy::random, 0.80, 0.0168, 0.0657}};
    const auto cmp = compare_strategies(r);
    CHECK(cmp.pdr_delta == doctest::Approx(0.15));
    REQUIRE(cmp.relative_collision_improvement);
    CHECK(*cmp.relative_collision_improvement == doctest::Approx(0.0067 / 0.0168));
    CHECK(*cmp.relative_collision_improvement == doctest::Approx(0.40).epsilon(0.01));
    CHECK(cmp.mmp_delta == doctest::Approx(-0.0297));
    REQUIRE(cmp.relative_pdr_improvement);
    CHECK(*cmp.relative_pdr_improvement == doctest::Approx(0.1875));

    SweepResult zero;
    zero.averages = {{Strategy::tsgs, 1.0, 0.0, 0.0}, {Strategy::random, 1.0, 0.0, 0.0}};
    CHECK_FALSE(compare_strategies(zero).relative_collision_improvement);

    SweepResult only;
    only.averages = {{Strategy::tsgs, 1.0, 0.0, 0.0}};
    CHECK_THROWS_AS(compare_strategies(only), InputError);
}

TEST_CASE("per-window deltas")
{
    const auto result = run_sweep(small_spec());
    const auto cmp = compare_strategies(result);
    REQUIRE(cmp.windows.size() == 3);
    for (std::size_t w = 0; w < 3; ++w)
    {
        const auto& t = result.cells[2 * w];
        const auto& r = result.cells[2 * w + 1];
        CHECK(cmp.windows[w].window == t.window);
        CHECK(cmp.windows[w].pdr_delta == t.pdr - r.pdr);
        CHECK(cmp.windows[w].collision_delta == t.collision_ratio - r.collision_ratio);
    }
}

TEST_CASE("sign test")
{
    const auto t = sign_test_greater({1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 5}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 5});
    CHECK(t.wins == 9);
    CHECK(t.losses == 1);
    CHECK(t.ties == 1);
    CHECK(t.p_value == doctest::Approx(11.0 / 1024.0));

    const auto even = sign_test_greater({1, 0}, {0, 1});
    CHECK(even.p_value == doctest::Approx(0.75));
    CHECK(sign_test_greater({1}, {1}).p_value == 1.0);
    CHECK_THROWS_AS(sign_test_greater({1}, {}), InputError);

    std::vector<double> a(30, 1.0), b(30, 0.0);
    CHECK(sign_test_greater(a, b).p_value == doctest::Approx(std::pow(0.5, 30)));
}
