#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "parlearn/approximator.hpp"
#include "parlearn/error.hpp"
#include "parlearn/linear_fn.hpp"
#include "support.hpp"

using namespace parlearn;

namespace {

Errc code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::ContractViolation;
}

Approximator constant(std::int64_t value)
{
    return Approximator([value](ExampleOracle&, std::size_t, std::uint64_t) { return value; },
                        ApproxTraits{"const", 0, 0, 0, true});
}

// Correct with probability 2/3 per call, otherwise answers far above the truth.
Approximator coin(std::int64_t truth)
{
    return Approximator(
        [truth](ExampleOracle&, std::size_t, std::uint64_t seed) {
            Rng rng(seed);
            return rng.bernoulli(2.0 / 3.0) ? truth : truth + 1 + static_cast<std::int64_t>(rng.below(3));
        },
        ApproxTraits{"coin", 0, 0, 1.0 / 3.0, false});
}

ExampleOracle planted(std::size_t n, std::size_t d, std::uint64_t seed, std::int64_t q = 2, double eta = 0)
{
    const FieldCtx F(q);
    Rng rng(seed);
    return ExampleOracle::simulated(sample_sparse_linear(F, n, d, rng), eta, std::max(eta, 0.0), seed + 1);
}

// Naive argmax over every function of F_q^n, enumeration order x0 least significant.
std::size_t naive_best_sparsity(const FieldCtx& F, std::size_t n, const std::vector<LabeledExample>& pool)
{
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < n; ++i)
        count *= F.q();
    std::size_t best_hits = 0, best_d = 0;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        std::vector<Elem> c(n);
        std::uint64_t t = idx;
        for (std::size_t i = 0; i < n; ++i, t /= F.q())
            c[i] = t % F.q();
        const LinearFn f(F, c);
        std::size_t hits = 0;
        for (const auto& ex : pool)
            hits += f(ex.a) == ex.b;
        if (idx == 0 || hits > best_hits) {
            best_hits = hits;
            best_d = f.sparsity();
        }
    }
    return best_d;
}

} // namespace

TEST_CASE("cheat band examples")
{
    const GammaSpec g = GammaSpec::affine(2);
    ExampleOracle o = planted(16, 6, 1);
    CHECK(cheat_band_approximator(g, CheatMode::Midpoint)(o, 16, 0) == 8);
    CHECK(cheat_band_approximator(g, CheatMode::LowEdge)(o, 16, 0) == 3);
    CHECK(cheat_band_approximator(g, CheatMode::HighEdge)(o, 16, 0) == 12);
    CHECK(cheat_band_approximator(g, CheatMode::Exact)(o, 16, 0) == 6);
    CHECK(gamma_band(g, 6).lo == 3);
    CHECK(gamma_band(g, 6).hi == 12);
    CHECK(gamma_band(g, 0).hi == 0);
}

TEST_CASE("cheat outputs are clipped to [0, n]")
{
    const GammaSpec g = GammaSpec::affine(2);
    ExampleOracle o = planted(10, 8, 2);
    CHECK(cheat_band_approximator(g, CheatMode::HighEdge)(o, 10, 0) == 10);
    CHECK(cheat_band_approximator(g, CheatMode::Midpoint)(o, 10, 0) == 10);
    ExampleOracle zero = planted(10, 0, 3);
    CHECK(cheat_band_approximator(g, CheatMode::HighEdge)(zero, 10, 0) == 0);
}

TEST_CASE("cheat uniform-in-band covers the band uniformly")
{
    const GammaSpec g = GammaSpec::affine(2);
    const Approximator A = cheat_band_approximator(g, CheatMode::UniformInBand);
    CHECK_FALSE(A.traits().deterministic_given_d);
    ExampleOracle o = planted(16, 4, 4);
    std::vector<std::size_t> counts(7, 0);
    const std::size_t calls = 10000;
    for (std::uint64_t s = 0; s < calls; ++s) {
        const auto D = A(o, 16, s);
        REQUIRE(D >= 2);
        REQUIRE(D <= 8);
        ++counts[static_cast<std::size_t>(D - 2)];
    }
    for (std::size_t c : counts)
        CHECK(std::abs(static_cast<double>(c) / calls - 1.0 / 7.0) <= 0.02);
    CHECK(testsupport::chi_square_uniform_p(counts) > 0.001);
    CHECK(A(o, 16, 99) == A(o, 16, 99));
}

TEST_CASE("cheat on special streams")
{
    const GammaSpec g = GammaSpec::affine(2);
    const FieldCtx F(2);
    ExampleOracle u = ExampleOracle::uniform_labels(F, 12, 0.1, 1);
    CHECK(cheat_band_approximator(g, CheatMode::Exact)(u, 12, 0) == 12);
    ExampleOracle pool = ExampleOracle::from_pool(F, 3, 0.1, {});
    CHECK(code_of([&] { cheat_band_approximator(g, CheatMode::Exact)(pool, 3, 0); }) == Errc::ContractViolation);

    ExampleOracle o = planted(8, 2, 5);
    cheat_band_approximator(g, CheatMode::Exact, 7)(o, 8, 0);
    CHECK(o.draws() == 7);
}

TEST_CASE("cheat band can be empty for a degenerate gamma")
{
    const GammaSpec g = GammaSpec::table({{1, 0.9}, {2, 3}});
    ExampleOracle o = planted(8, 1, 6);
    CHECK(code_of([&] { cheat_band_approximator(g, CheatMode::Midpoint)(o, 8, 0); }) == Errc::EmptyBand);
}

TEST_CASE("cheat mode names")
{
    for (CheatMode m : {CheatMode::Exact, CheatMode::Midpoint, CheatMode::UniformInBand, CheatMode::LowEdge,
                        CheatMode::HighEdge})
        CHECK(parse_cheat_mode(to_string(m)) == m);
    CHECK(code_of([] { parse_cheat_mode("oracle"); }) == Errc::ParseError);
}

TEST_CASE("brute force sample count")
{
    CHECK(brute_force_sample_count(1024, 0.05, 0.1, 2) == 63);
    CHECK(code_of([] { brute_force_sample_count(1024, 0.05, 0.5, 2); }) == Errc::BadRates);
}

TEST_CASE("brute force is exact on noiseless streams")
{
    const FieldCtx F2(2), F3(3);
    const Approximator A = brute_force_approximator(F2, 10, 0.1, 0.05);
    CHECK(A.traits().examples_per_call == 63);
    for (std::uint64_t s = 0; s < 30; ++s) {
        const std::size_t d = s % 11;
        ExampleOracle o = planted(10, d, 100 + s);
        REQUIRE(A(o, 10, s) == static_cast<std::int64_t>(d));
    }
    const Approximator B = brute_force_approximator(F3, 6, 0.1, 0.05);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const std::size_t d = s % 7;
        ExampleOracle o = planted(6, d, 200 + s, 3);
        REQUIRE(B(o, 6, s) == static_cast<std::int64_t>(d));
    }
    CHECK(code_of([&] { brute_force_approximator(F2, 21, 0.1, 0.05); }) == Errc::TooLargeToEnumerate);
    CHECK(code_of([&] { brute_force_approximator(F3, 13, 0.1, 0.05); }) == Errc::TooLargeToEnumerate);
    ExampleOracle wrong = planted(9, 2, 7);
    CHECK(code_of([&] { A(wrong, 9, 0); }) == Errc::DimensionMismatch);
}

TEST_CASE("brute force enumeration matches a naive scan on noisy pools")
{
    for (std::int64_t q : {2, 3, 5}) {
        const FieldCtx F(q);
        const std::size_t n = q == 5 ? 3 : 4;
        const double eta_b = q == 2 ? 0.3 : 0.5;
        const Approximator A = brute_force_approximator(F, n, eta_b, 0.2);
        const std::size_t Q = A.traits().examples_per_call;
        for (std::uint64_t s = 0; s < 15; ++s) {
            Rng rng(s);
            ExampleOracle src = ExampleOracle::simulated(sample_sparse_linear(F, n, s % (n + 1), rng), eta_b,
                                                         eta_b, 500 + s);
            std::vector<LabeledExample> pool;
            for (std::size_t i = 0; i < Q; ++i)
                pool.push_back(src.next());
            ExampleOracle replay = ExampleOracle::from_pool(F, n, eta_b, pool);
            REQUIRE(A(replay, n, 0) == static_cast<std::int64_t>(naive_best_sparsity(F, n, pool)));
        }
    }
}

TEST_CASE("brute force succeeds with probability at least 1 - delta under noise")
{
    const FieldCtx F(2);
    const Approximator A = brute_force_approximator(F, 10, 0.1, 0.05);
    std::size_t correct = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const std::size_t d = 1 + s % 10;
        ExampleOracle o = planted(10, d, 1000 + s, 2, 0.1);
        correct += A(o, 10, s) == static_cast<std::int64_t>(d);
    }
    CHECK(correct >= 190);
}

TEST_CASE("clamp_to_delta")
{
    const GammaSpec g = GammaSpec::affine(2);
    ExampleOracle o = planted(20, 3, 8);
    CHECK(clamp_to_delta(constant(7), g)(o, 20, 0) == 14);
    CHECK(clamp_to_delta(constant(15), g)(o, 20, 0) == 20);
    CHECK(clamp_to_delta(constant(0), g)(o, 20, 0) == 0);
    const Approximator low = cheat_band_approximator(g, CheatMode::LowEdge);
    CHECK(&clamp_to_delta(low, g).unclamped() != nullptr);
    CHECK(clamp_to_delta(low, g).unclamped().traits().descriptor == "cheat:low");
}

TEST_CASE("clamped band approximators obey d <= D' <= Delta(d) <= n")
{
    for (const GammaSpec& g : {GammaSpec::affine(2), GammaSpec::affine(1.42), GammaSpec::power(1.5)}) {
        const std::size_t n = 24;
        for (CheatMode mode : {CheatMode::LowEdge, CheatMode::HighEdge, CheatMode::Midpoint, CheatMode::Exact,
                               CheatMode::UniformInBand}) {
            const Approximator A = clamp_to_delta(cheat_band_approximator(g, mode), g);
            for (std::size_t d = 0; d <= n; ++d) {
                ExampleOracle o = planted(n, d, 30 + d);
                for (std::uint64_t s = 0; s < 5; ++s) {
                    const auto D = A(o, n, s);
                    REQUIRE(D >= static_cast<std::int64_t>(d));
                    REQUIRE(D <= static_cast<std::int64_t>(n));
                    if (d > 0)
                        REQUIRE(D <= floor_out(g.delta_cap(static_cast<double>(d), n)));
                }
            }
        }
    }
}

TEST_CASE("boost_median")
{
    CHECK(boost_reps(1.0 / 2e6) == 262);
    CHECK(boost_reps(0.01) == 83);
    CHECK(code_of([] { boost_reps(0); }) == Errc::OutOfDomain);

    ExampleOracle o = planted(10, 4, 9);
    const Approximator exact = cheat_band_approximator(GammaSpec::affine(2), CheatMode::Exact);
    for (double delta : {0.5, 0.1, 0.001})
        CHECK(boost_median(exact, delta)(o, 10, 1) == 4);

    const Approximator boosted = boost_median(coin(5), 0.01);
    CHECK(boosted.traits().failure_bound == 0.01);
    std::size_t failures = 0;
    const std::size_t runs = 10000;
    for (std::uint64_t s = 0; s < runs; ++s)
        failures += boosted(o, 10, s) != 5;
    CHECK(static_cast<double>(failures) / runs <= 0.01);

    // the guarantee is preserved under re-boosting
    const Approximator twice = boost_median(boost_median(coin(5), 0.2), 0.01);
    std::size_t failures2 = 0;
    for (std::uint64_t s = 0; s < 2000; ++s)
        failures2 += twice(o, 10, s) != 5;
    CHECK(static_cast<double>(failures2) / 2000 <= 0.01);
}

TEST_CASE("median is the lower median")
{
    // alternating 1, 2 over an even number of runs: lower median is 1
    const Approximator alt(
        [](ExampleOracle&, std::size_t, std::uint64_t seed) { return static_cast<std::int64_t>(1 + seed % 2); },
        ApproxTraits{"alt", 0, 0, 0, false});
    ExampleOracle o = planted(4, 1, 10);
    // reps = ceil(18 ln 2) = 13 (odd): counts are decided by the derived seeds, so compare against a replay
    const Approximator b = boost_median(alt, 0.5);
    std::vector<std::int64_t> outs;
    for (std::size_t r = 0; r < boost_reps(0.5); ++r)
        outs.push_back(alt(o, 4, derive_seed(77, "boost-median", r)));
    std::sort(outs.begin(), outs.end());
    CHECK(b(o, 4, 77) == outs[(outs.size() - 1) / 2]);
}

TEST_CASE("default inner delta")
{
    CHECK(default_inner_delta(2, 10) == doctest::Approx(1.0 / 2e7));
    CHECK(default_inner_delta(3, 1) == doctest::Approx(1.0 / 3));
}
