#include "linksched/prob.hpp"

#include <algorithm>
#include <stdexcept>

namespace linksched::prob {

void ContentionSetup::validate() const
{
    if (w < 1)
        throw std::invalid_argument("contention window must hold at least one slot value (w >= 1)");
}

namespace {

BigInt binomial(std::uint64_t top, std::uint64_t k)
{
    if (k > top)
        return 0;
    k = std::min(k, top - k);
    BigInt acc = 1;
    // acc * (top - i) is always divisible by (i + 1) at this point.
    for (std::uint64_t i = 0; i < k; ++i)
    {
        acc *= top - i;
        acc /= i + 1;
    }
    return acc;
}

} // namespace

BigInt combinations_without_repetition(std::uint32_t w, std::uint32_t n)
{
    if (w < 1)
        throw std::invalid_argument("w must be >= 1");
    return binomial(w, n);
}

BigInt combinations_with_repetition(std::uint32_t w, std::uint32_t n)
{
    if (w < 1)
        throw std::invalid_argument("w must be >= 1");
    return binomial(std::uint64_t{w} + n - 1, n);
}

CollisionProbability collision_probability(const ContentionSetup& setup)
{
    setup.validate();
    const BigInt distinct = combinations_without_repetition(setup.w, setup.n);
    const BigInt all = combinations_with_repetition(setup.w, setup.n);
    CollisionProbability out;
    out.p_free = Rational(distinct, all);
    out.p_collision = Rational(1) - out.p_free;
    return out;
}

std::vector<ProbabilityRow> probability_table(std::uint32_t w, std::uint32_t n_max)
{
    std::vector<ProbabilityRow> rows;
    rows.reserve(std::size_t{n_max} + 1);
    for (std::uint32_t n = 0; n <= n_max; ++n)
    {
        auto p = collision_probability({w, n});
        rows.push_back({n, std::move(p.p_free), std::move(p.p_collision)});
        if (n == UINT32_MAX)
            break;
    }
    return rows;
}

std::string to_decimal(const Rational& value, unsigned digits)
{
    if (value < 0)
        throw std::invalid_argument("to_decimal expects a non-negative value");
    BigInt scale = 1;
    for (unsigned i = 0; i < digits; ++i)
        scale *= 10;

    const BigInt num = boost::multiprecision::numerator(value) * scale;
    const BigInt den = boost::multiprecision::denominator(value);
    BigInt q = num / den;
    const BigInt r = num % den;
    const BigInt twice = r * 2;
    if (twice > den || (twice == den && (q % 2) != 0))
        q += 1;

    const BigInt whole = q / scale;
    const BigInt rem = q % scale;
    std::string frac = rem.str();
    std::string out = whole.str();
    if (digits > 0)
    {
        out += '.';
        out += std::string(digits - frac.size(), '0');
        out += frac;
    }
    return out;
}

std::string to_fraction(const Rational& value)
{
    return boost::multiprecision::numerator(value).str() + "/" +
           boost::multiprecision::denominator(value).str();
}

double to_double(const Rational& value)
{
    return value.convert_to<double>();
}

} // namespace linksched::prob
