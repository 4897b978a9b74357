#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

// Transmission-cost models for feedback-based recovery (HARQ with ARQ on
// top) versus block network coding. The closed forms count transmissions
// per source packet needed to reach zero residual loss at i.i.d. loss rate
// r, assuming half the first-transmission losses are recovered by HARQ and
// the other half fall through to ARQ:
//
//   harq/arq cheapest case   1 + 3r      (recovery on the first retry)
//   harq/arq costliest case  1 + 21.5r   (recovery on the very last round)
//   network coding           1/CR, bounded below by capacity 1/(1-r)
//
// Exact rational arithmetic throughout; the Monte Carlo variant reproduces
// the closed-form endpoints and adds a uniform in-between mode.

namespace nc {

using Rational = boost::rational<long long>;

// "0.2", "1/5" or "3" -> exact rational. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

// Cheapest HARQ/ARQ cost: (1-r) + 2*(r/2) + 6*(r/2) = 1 + 3r.
Rational p_ha_min(const Rational& r);

// Costliest HARQ/ARQ cost: (1-r) + 5*(r/2) + 40*(r/2) = 1 + 21.5r.
Rational p_ha_max(const Rational& r);

// Network coding sends 1/CR packets per source packet.
Rational p_nc(const Rational& code_rate);

// Capacity floor for any erasure code at loss rate r: 1/(1-r).
Rational p_nc_capacity(const Rational& r);

// p_ha_max(r) / p_nc_capacity(r) = (1 + 21.5r)(1 - r).
Rational nc_advantage(const Rational& r);

struct RetxParams {
    int harq_max_tx = 5;     // transmissions per HARQ cycle
    int arq_max_rounds = 8;  // ARQ rounds, each restarting a HARQ cycle
    double harq_share = 0.5; // fraction of first-tx losses HARQ recovers
};

enum class McMode {
    endpoint_min,  // recovery always at the cheapest outcome
    endpoint_max,  // recovery always at the costliest outcome
    uniform,       // cost drawn uniformly over the outcome range
};

struct McResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
};

// Samples transmissions per delivered packet. Endpoint modes converge to
// p_ha_min / p_ha_max; the uniform mode is an extra modeling choice that
// falls between the two endpoints.
McResult mc_harq_arq_cost(const RetxParams& params, double r,
                          std::uint64_t trials, std::uint64_t seed, McMode mode);

const char* to_string(McMode mode);

} // namespace nc
