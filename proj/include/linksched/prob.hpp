#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace linksched::prob {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// w backoff values (counters drawn from [0, w-1]) shared by n contenders.
struct ContentionSetup
{
    std::uint32_t w = 16;
    std::uint32_t n = 0;

    /// Throws std::invalid_argument when w == 0.
    void validate() const;
};

struct CollisionProbability
{
    Rational p_free;
    Rational p_collision;
};

struct ProbabilityRow
{
    std::uint32_t n = 0;
    Rational p_free;
    Rational p_collision;
};

/// C(w, n); zero when n > w.
BigInt combinations_without_repetition(std::uint32_t w, std::uint32_t n);

/// H(w, n) = C(w + n - 1, n), the number of size-n multisets over w values.
BigInt combinations_with_repetition(std::uint32_t w, std::uint32_t n);

/// Collision-free probability C(w,n) / H(w,n), reduced, and its complement.
///
/// The sample space is the set of unordered multisets of backoff values,
/// each counted once. This is not the same as n i.i.d. uniform draws (which
/// would give w!/((w-n)! w^n)).
CollisionProbability collision_probability(const ContentionSetup& setup);

/// Rows for n = 0..n_max at fixed w.
std::vector<ProbabilityRow> probability_table(std::uint32_t w, std::uint32_t n_max);

/// Decimal rendering of a non-negative rational with `digits` fractional
/// digits, rounding half to even. Exact: no floating point is involved.
std::string to_decimal(const Rational& value, unsigned digits = 4);

/// "p/q" in lowest terms.
std::string to_fraction(const Rational& value);

double to_double(const Rational& value);

} // namespace linksched::prob
