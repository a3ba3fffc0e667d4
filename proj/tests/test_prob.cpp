#include "linksched/prob.hpp"

#include <doctest.h>

#include <functional>

using namespace linksched::prob;

namespace {

// Walks every non-decreasing n-tuple over [0, w) and counts those whose
// entries are pairwise distinct.
std::pair<long, long> enumerate_multisets(unsigned w, unsigned n)
{
    long total = 0, distinct = 0;
    std::vector<unsigned> pick(n);
    std::function<void(unsigned, unsigned)> walk = [&](unsigned pos, unsigned lo) {
        if (pos == n)
        {
            ++total;
            bool ok = true;
            for (unsigned i = 1; i < n; ++i)
                ok = ok && pick[i] != pick[i - 1];
            distinct += ok;
            return;
        }
        for (unsigned v = lo; v < w; ++v)
        {
            pick[pos] = v;
            walk(pos + 1, v);
        }
    };
    walk(0, 0);
    return {distinct, total};
}

// Pascal-style recurrence for multiset counts: H(w, n) = H(w-1, n) + H(w, n-1).
BigInt multiset_count(unsigned w, unsigned n)
{
    std::vector<std::vector<BigInt>> h(w + 1, std::vector<BigInt>(n + 1, 0));
    for (unsigned a = 1; a <= w; ++a)
    {
        h[a][0] = 1;
        for (unsigned b = 1; b <= n; ++b)
            h[a][b] = h[a - 1][b] + h[a][b - 1];
    }
    return w == 0 ? BigInt(n == 0 ? 1 : 0) : h[w][n];
}

} // namespace

TEST_CASE("collision probability matches multiset enumeration")
{
    for (unsigned w = 1; w <= 6; ++w)
    {
        for (unsigned n = 0; n <= 6; ++n)
        {
            CAPTURE(w);
            CAPTURE(n);
            const auto [distinct, total] = enumerate_multisets(w, n);
            const auto p = collision_probability({w, n});
            CHECK(p.p_free == Rational(distinct, total));
            CHECK(p.p_free + p.p_collision == 1);
        }
    }
}

TEST_CASE("counting functions")
{
    CHECK(combinations_without_repetition(16, 2) == 120);
    CHECK(combinations_with_repetition(16, 2) == 136);
    CHECK(combinations_without_repetition(16, 5) == 4368);
    CHECK(combinations_with_repetition(16, 5) == 15504);
    CHECK(combinations_without_repetition(3, 5) == 0);
    CHECK(combinations_with_repetition(5, 0) == 1);
    for (unsigned w = 1; w <= 20; ++w)
        for (unsigned n = 0; n <= 20; ++n)
            CHECK(combinations_with_repetition(w, n) == multiset_count(w, n));
}

TEST_CASE("sixteen backoff values")
{
    const auto two = collision_probability({16, 2});
    CHECK(two.p_collision == Rational(2, 17));
    CHECK(to_decimal(two.p_collision) == "0.1176");

    const auto five = collision_probability({16, 5});
    CHECK(five.p_collision == Rational(232, 323));
    CHECK(to_decimal(five.p_collision) == "0.7183");

    CHECK(collision_probability({16, 0}).p_collision == 0);
    CHECK(collision_probability({16, 1}).p_collision == 0);
    CHECK(collision_probability({16, 17}).p_free == 0);
}

TEST_CASE("collision probability grows with contenders")
{
    for (unsigned w : {2u, 7u, 16u, 64u})
    {
        const auto rows = probability_table(w, w + 2);
        REQUIRE(rows.size() == w + 3);
        for (std::size_t i = 1; i < rows.size(); ++i)
        {
            CHECK(rows[i].n == i);
            CHECK(rows[i].p_collision >= rows[i - 1].p_collision);
        }
    }
}

TEST_CASE("table with n_max zero has one row")
{
    const auto rows = probability_table(16, 0);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].p_free == 1);
}

TEST_CASE("zero-width window is rejected")
{
    CHECK_THROWS_AS(collision_probability({0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(probability_table(0, 3), std::invalid_argument);
}

TEST_CASE("decimal rendering rounds half to even")
{
    CHECK(to_decimal(Rational(1, 8), 2) == "0.12");
    CHECK(to_decimal(Rational(3, 8), 2) == "0.38");
    CHECK(to_decimal(Rational(5, 8), 2) == "0.62");
    CHECK(to_decimal(Rational(1, 3), 4) == "0.3333");
    CHECK(to_decimal(Rational(2, 3), 4) == "0.6667");
    CHECK(to_decimal(Rational(1), 3) == "1.000");
    CHECK(to_decimal(Rational(999999, 1000000), 4) == "1.0000");
    CHECK(to_decimal(Rational(7, 2), 0) == "4");
    CHECK(to_fraction(Rational(15, 17)) == "15/17");
    CHECK(to_double(Rational(1, 4)) == doctest::Approx(0.25));
}
