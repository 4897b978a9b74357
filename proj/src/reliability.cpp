#include "nc/reliability.hpp"

#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nc {

namespace {

const Rational kOne{1};

void require_unit_interval(const Rational& r, bool allow_one) {
    if (r < Rational{0} || r > kOne || (!allow_one && r == kOne))
        throw std::domain_error("reliability: loss rate outside valid range");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// stoll that insists the whole string is consumed.
long long parse_ll(std::string_view text) {
    const std::string s(trim(text));
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("rational: trailing characters in '" + s + "'");
    return v;
}

} // namespace

Rational parse_rational(std::string_view text) {
    text = trim(text);
    if (text.empty())
        throw std::invalid_argument("rational: empty string");
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        const long long num = parse_ll(text.substr(0, slash));
        const long long den = parse_ll(text.substr(slash + 1));
        if (den == 0)
            throw std::invalid_argument("rational: zero denominator");
        return {num, den};
    }
    const auto dot = text.find('.');
    if (dot == std::string_view::npos)
        return {parse_ll(text), 1};
    const std::string whole(text.substr(0, dot));
    const std::string frac(text.substr(dot + 1));
    if (frac.size() > 15)
        throw std::invalid_argument("rational: too many decimal digits");
    long long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i)
        den *= 10;
    const long long w = whole.empty() || whole == "-" ? 0 : parse_ll(whole);
    const long long f = frac.empty() ? 0 : parse_ll(frac);
    if (f < 0)
        throw std::invalid_argument("rational: sign inside decimal digits");
    const bool negative = !whole.empty() && whole[0] == '-';
    Rational q{w, 1};
    Rational fpart{f, den};
    return negative ? q - fpart : q + fpart;
}

std::string to_string(const Rational& q) {
    if (q.denominator() == 1)
        return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

double to_double(const Rational& q) {
    return boost::rational_cast<double>(q);
}

Rational p_ha_min(const Rational& r) {
    require_unit_interval(r, true);
    return kOne + Rational{3} * r;
}

Rational p_ha_max(const Rational& r) {
    require_unit_interval(r, true);
    return kOne + Rational{43, 2} * r;
}

Rational p_nc(const Rational& code_rate) {
    if (code_rate <= Rational{0} || code_rate > kOne)
        throw std::domain_error("reliability: code rate outside (0,1]");
    return kOne / code_rate;
}

Rational p_nc_capacity(const Rational& r) {
    require_unit_interval(r, false);
    return kOne / (kOne - r);
}

Rational nc_advantage(const Rational& r) {
    require_unit_interval(r, false);
    return p_ha_max(r) * (kOne - r);
}

const char* to_string(McMode mode) {
    switch (mode) {
    case McMode::endpoint_min: return "min";
    case McMode::endpoint_max: return "max";
    case McMode::uniform: return "uniform";
    }
    return "unknown";
}

McResult mc_harq_arq_cost(const RetxParams& params, double r,
                          std::uint64_t trials, std::uint64_t seed, McMode mode) {
    if (trials < 1)
        throw std::invalid_argument("reliability: trials must be >= 1");
    if (r < 0.0 || r > 1.0)
        throw std::domain_error("reliability: loss rate outside [0,1]");
    if (params.harq_max_tx < 1 || params.arq_max_rounds < 0)
        throw std::invalid_argument("reliability: bad retransmission bounds");

    // HARQ recovery costs lie in {2 .. harq_max_tx}; ARQ recovery restarts
    // HARQ cycles, so its totals lie in {harq_max_tx+1 .. harq_max_tx*rounds}.
    const int harq_lo = 2;
    const int harq_hi = params.harq_max_tx;
    const int arq_lo = params.harq_max_tx + 1;
    const int arq_hi = params.harq_max_tx * std::max(params.arq_max_rounds, 1);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> harq_draw(harq_lo, std::max(harq_lo, harq_hi));
    std::uniform_int_distribution<int> arq_draw(arq_lo, std::max(arq_lo, arq_hi));

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        double cost = 1.0;
        if (unit(rng) < r) {
            const bool via_harq = unit(rng) < params.harq_share;
            switch (mode) {
            case McMode::endpoint_min:
                cost = via_harq ? harq_lo : arq_lo;
                break;
            case McMode::endpoint_max:
                cost = via_harq ? harq_hi : arq_hi;
                break;
            case McMode::uniform:
                cost = via_harq ? harq_draw(rng) : arq_draw(rng);
                break;
            }
        }
        sum += cost;
        sum_sq += cost * cost;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    McResult res;
    res.mean = mean;
    res.std_error = trials > 1 ? std::sqrt(var / n) : 0.0;
    res.trials = trials;
    return res;
}

} // namespace nc
