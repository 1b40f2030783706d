#include "parlearn/approximator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "parlearn/error.hpp"
#include "parlearn/planted_access.hpp"

namespace parlearn {

Approximator::Approximator(Fn fn, ApproxTraits traits, std::shared_ptr<const Approximator> unclamped)
    : fn_(std::move(fn)), traits_(std::move(traits)), unclamped_(std::move(unclamped))
{
}

std::int64_t Approximator::operator()(ExampleOracle& oracle, std::size_t n, std::uint64_t seed) const
{
    const std::int64_t d = fn_(oracle, n, seed);
    return std::clamp<std::int64_t>(d, 0, static_cast<std::int64_t>(n));
}

CheatMode parse_cheat_mode(const std::string& name)
{
    if (name == "exact")
        return CheatMode::Exact;
    if (name == "midpoint")
        return CheatMode::Midpoint;
    if (name == "uniform" || name == "uniform-in-band")
        return CheatMode::UniformInBand;
    if (name == "low" || name == "low-edge")
        return CheatMode::LowEdge;
    if (name == "high" || name == "high-edge")
        return CheatMode::HighEdge;
    throw Error(Errc::ParseError, "unknown cheat mode '" + name + "'");
}

std::string to_string(CheatMode mode)
{
    switch (mode) {
    case CheatMode::Exact: return "exact";
    case CheatMode::Midpoint: return "midpoint";
    case CheatMode::UniformInBand: return "uniform";
    case CheatMode::LowEdge: return "low";
    case CheatMode::HighEdge: return "high";
    }
    return "?";
}

Band gamma_band(const GammaSpec& gamma, std::size_t d)
{
    if (d == 0)
        return {0, 0};
    const double x = static_cast<double>(d);
    return {ceil_out(gamma.inverse(x)), floor_out(gamma.eval(x))};
}

Approximator cheat_band_approximator(const GammaSpec& gamma, CheatMode mode, std::size_t examples_per_call)
{
    auto fn = [gamma, mode, examples_per_call](ExampleOracle& oracle, std::size_t n,
                                               std::uint64_t seed) -> std::int64_t {
        for (std::size_t i = 0; i < examples_per_call; ++i)
            oracle.next();
        const StreamTruth truth = PlantedAccess::truth(oracle);
        std::size_t d = 0;
        switch (truth.kind) {
        case StreamTruth::Kind::Unknown:
            throw Error(Errc::ContractViolation, "cheat approximator used on a stream without a planted target");
        case StreamTruth::Kind::UniformLabels: d = n; break;
        case StreamTruth::Kind::Planted: d = truth.target->sparsity(); break;
        }
        if (mode == CheatMode::Exact)
            return static_cast<std::int64_t>(d);
        const Band band = gamma_band(gamma, d);
        if (band.lo > band.hi)
            throw Error(Errc::EmptyBand, "empty gamma band at d = " + std::to_string(d));
        switch (mode) {
        case CheatMode::Midpoint: return std::lround(0.5 * static_cast<double>(band.lo + band.hi));
        case CheatMode::LowEdge: return band.lo;
        case CheatMode::HighEdge: return band.hi;
        case CheatMode::UniformInBand: {
            Rng rng(derive_seed(seed, "cheat/uniform"));
            return band.lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(band.hi - band.lo + 1)));
        }
        case CheatMode::Exact: break;
        }
        return static_cast<std::int64_t>(d);
    };
    ApproxTraits traits;
    traits.descriptor = "cheat:" + to_string(mode);
    traits.examples_per_call = examples_per_call;
    traits.deterministic_given_d = mode != CheatMode::UniformInBand;
    return Approximator(std::move(fn), std::move(traits));
}

std::size_t brute_force_sample_count(double num_candidates, double delta, double eta_bound, std::uint64_t q)
{
    const double margin = 1.0 - eta_bound - 1.0 / static_cast<double>(q);
    if (!(margin > 0) || !(delta > 0) || !(delta < 1))
        throw Error(Errc::BadRates, "sample count needs 0 < delta < 1 and eta_bound < 1 - 1/q");
    return static_cast<std::size_t>(std::ceil(std::log(num_candidates / delta) / (margin * margin)));
}

Approximator brute_force_approximator(const FieldCtx& ctx, std::size_t n, double eta_bound, double delta)
{
    const std::uint64_t q = ctx.q();
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (count > (1ULL << 20) / q)
            throw Error(Errc::TooLargeToEnumerate, "q^n exceeds 2^20");
        count *= q;
    }
    const std::size_t Q = brute_force_sample_count(static_cast<double>(count), delta, eta_bound, q);

    // sparsity of the function with enumeration index f (base-q digits, x0 least significant)
    std::vector<std::uint8_t> weight(count, 0);
    for (std::uint64_t f = 1; f < count; ++f)
        weight[f] = static_cast<std::uint8_t>(weight[f / q] + (f % q != 0));

    auto fn = [ctx, n, Q, count, weight](ExampleOracle& oracle, std::size_t call_n, std::uint64_t) -> std::int64_t {
        if (oracle.dim() != n || call_n != n)
            throw Error(Errc::DimensionMismatch, "brute force approximator built for n = " + std::to_string(n));
        const std::uint64_t q = ctx.q();
        std::vector<std::uint32_t> agree(count, 0);
        std::vector<Elem> values(count);
        for (std::size_t s = 0; s < Q; ++s) {
            const LabeledExample ex = oracle.next();
            if (q == 2) {
                std::uint64_t mask = 0;
                for (std::size_t i = 0; i < n; ++i)
                    mask |= static_cast<std::uint64_t>(ex.a[i]) << i;
                for (std::uint64_t f = 0; f < count; ++f)
                    agree[f] += static_cast<std::uint32_t>((std::popcount(f & mask) & 1) == ex.b);
            } else {
                // values[f] = f . a, built digit by digit
                values[0] = 0;
                std::uint64_t len = 1;
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::uint64_t c = 1; c < q; ++c) {
                        const Elem term = ctx.mul(c, ex.a[i]);
                        for (std::uint64_t j = 0; j < len; ++j)
                            values[c * len + j] = ctx.add(values[j], term);
                    }
                    len *= q;
                }
                for (std::uint64_t f = 0; f < count; ++f)
                    agree[f] += static_cast<std::uint32_t>(values[f] == ex.b);
            }
        }
        const auto best = std::max_element(agree.begin(), agree.end()) - agree.begin();
        return weight[static_cast<std::size_t>(best)];
    };
    ApproxTraits traits;
    traits.descriptor = "brute";
    traits.examples_per_call = Q;
    traits.failure_bound = delta;
    traits.deterministic_given_d = true;
    return Approximator(std::move(fn), std::move(traits));
}

Approximator clamp_to_delta(const Approximator& inner, const GammaSpec& gamma)
{
    auto raw = std::make_shared<const Approximator>(inner.unclamped());
    auto fn = [inner, gamma](ExampleOracle& oracle, std::size_t n, std::uint64_t seed) -> std::int64_t {
        const std::int64_t d = inner(oracle, n, seed);
        if (d <= 0)
            return 0;
        return std::min<std::int64_t>(floor_out(gamma.eval(static_cast<double>(d))), static_cast<std::int64_t>(n));
    };
    ApproxTraits traits = inner.traits();
    traits.descriptor = "clamp(" + traits.descriptor + ")";
    return Approximator(std::move(fn), std::move(traits), std::move(raw));
}

std::size_t boost_reps(double delta)
{
    if (!(delta > 0) || !(delta < 1))
        throw Error(Errc::OutOfDomain, "boosting needs 0 < delta < 1");
    return static_cast<std::size_t>(std::ceil(18.0 * std::log(1.0 / delta)));
}

Approximator boost_median(const Approximator& inner, double target_delta)
{
    const std::size_t reps = boost_reps(target_delta);
    auto fn = [inner, reps](ExampleOracle& oracle, std::size_t n, std::uint64_t seed) -> std::int64_t {
        std::vector<std::int64_t> outs(reps);
        for (std::size_t r = 0; r < reps; ++r)
            outs[r] = inner(oracle, n, derive_seed(seed, "boost-median", r));
        const auto mid = outs.begin() + static_cast<std::ptrdiff_t>((reps - 1) / 2);
        std::nth_element(outs.begin(), mid, outs.end());
        return *mid;
    };
    ApproxTraits traits = inner.traits();
    traits.descriptor = "median(" + traits.descriptor + ")";
    traits.examples_per_call *= reps;
    traits.ms_per_call *= static_cast<double>(reps);
    traits.failure_bound = target_delta;
    return Approximator(std::move(fn), std::move(traits));
}

double default_inner_delta(std::uint64_t q, std::size_t n)
{
    return 1.0 / (static_cast<double>(q) * std::pow(static_cast<double>(n), 7.0));
}

} // namespace parlearn
