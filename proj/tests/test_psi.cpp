#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "parlearn/error.hpp"
#include "parlearn/linear_fn.hpp"
#include "parlearn/psi.hpp"

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

PsiTable table_of(std::size_t n, std::vector<double> values)
{
    PsiTable t;
    t.n = n;
    t.values = std::move(values);
    return t;
}

// Mean of the clipped uniform band output conditioned on acceptance, by enumeration.
double conditioned_band_mean(const GammaSpec& g, std::size_t n, std::size_t d)
{
    const Band b = gamma_band(g, d);
    const std::int64_t cap = floor_out(g.delta_cap(static_cast<double>(d), n));
    double sum = 0;
    std::size_t count = 0;
    for (std::int64_t v = b.lo; v <= b.hi; ++v) {
        const std::int64_t out = std::clamp<std::int64_t>(v, 0, static_cast<std::int64_t>(n));
        if (out >= static_cast<std::int64_t>(d) && out <= cap) {
            sum += static_cast<double>(out);
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

} // namespace

TEST_CASE("sample counts")
{
    CHECK(psi_table_trials(16, 1.0 / 256, 0.25) == 46516320);
    CHECK(psi_estimate_iterations(16, 1.0 / 256, 0.25) == 17443620);
    CHECK(psi_table_trials(4, 0.25, 0.1) == 650);
    CHECK(psi_estimate_iterations(4, 0.25, 0.1) == 384);
    CHECK(code_of([] { psi_table_trials(4, 0, 0.1); }) == Errc::OutOfDomain);
}

TEST_CASE("exact approximator gives Psi'(d) = d")
{
    const FieldCtx F(2);
    const GammaSpec g = GammaSpec::affine(2);
    const PsiTable t =
        build_psi_table(cheat_band_approximator(g, CheatMode::Exact), g, F, 16, 0.1, 1.0 / 256, 0.25, 7);
    REQUIRE(t.values.size() == 16);
    CHECK(t.trials_per_d == 1);
    for (std::size_t d = 1; d <= 16; ++d)
        CHECK(t.at(d) == static_cast<double>(d));
    CHECK(t.at(0) == 0);
    CHECK(code_of([&] { t.at(17); }) == Errc::OutOfDomain);
    CHECK(t.gamma == g.descriptor());
    CHECK(t.approximator == "cheat:exact");
}

TEST_CASE("midpoint approximator table")
{
    const FieldCtx F(2);
    const GammaSpec g = GammaSpec::affine(2);
    const PsiTable t =
        build_psi_table(cheat_band_approximator(g, CheatMode::Midpoint), g, F, 16, 0.1, 1.0 / 256, 0.25, 7);
    const std::vector<double> expected{2, 3, 4, 5, 7, 8, 9, 10, 12, 13, 14, 15, 16, 16, 16, 16};
    CHECK(t.values == expected);
}

TEST_CASE("uniform band table matches the conditioned mean within h")
{
    const FieldCtx F(2);
    const GammaSpec g = GammaSpec::affine(2);
    const double h = 0.25;
    PsiOptions slow;
    slow.fast_mode = false;
    const PsiTable t = build_psi_table(cheat_band_approximator(g, CheatMode::UniformInBand), g, F, 4, 0.1, h,
                                       0.1, 3, slow);
    CHECK(t.trials_per_d == 650);
    for (std::size_t d = 1; d <= 4; ++d) {
        CHECK(std::abs(t.at(d) - conditioned_band_mean(g, 4, d)) <= h);
        CHECK(t.at(d) >= static_cast<double>(d));
    }
    CHECK(conditioned_band_mean(g, 4, 3) == doctest::Approx(3.75));
}

TEST_CASE("table entries lie in [d, Delta(d)]")
{
    const FieldCtx F(3);
    for (const GammaSpec& g : {GammaSpec::affine(1.5), GammaSpec::power(1.5), GammaSpec::affine(3)}) {
        for (CheatMode m : {CheatMode::HighEdge, CheatMode::Midpoint}) {
            const PsiTable t = build_psi_table(cheat_band_approximator(g, m), g, F, 12, 0.2, 0.01, 0.1, 11);
            for (std::size_t d = 1; d <= 12; ++d) {
                CHECK(t.at(d) >= static_cast<double>(d));
                CHECK(t.at(d) <= g.delta_cap(static_cast<double>(d), 12) + 1e-9);
            }
        }
    }
}

TEST_CASE("max_d leaves later entries at Delta(d)")
{
    const FieldCtx F(2);
    const GammaSpec g = GammaSpec::affine(2);
    PsiOptions opt;
    opt.max_d = 3;
    const PsiTable t =
        build_psi_table(cheat_band_approximator(g, CheatMode::Exact), g, F, 16, 0.1, 0.01, 0.1, 1, opt);
    CHECK(t.at(3) == 3);
    CHECK(t.at(4) == doctest::Approx(g.delta_cap(4, 16)));
    CHECK(t.at(16) == 16);
}

TEST_CASE("table building is deterministic in the seed")
{
    const FieldCtx F(2);
    const GammaSpec g = GammaSpec::affine(2);
    const Approximator A = cheat_band_approximator(g, CheatMode::UniformInBand);
    PsiOptions slow;
    slow.fast_mode = false;
    const PsiTable a = build_psi_table(A, g, F, 4, 0.1, 0.5, 0.2, 5, slow);
    const PsiTable b = build_psi_table(A, g, F, 4, 0.1, 0.5, 0.2, 5, slow);
    const PsiTable c = build_psi_table(A, g, F, 4, 0.1, 0.5, 0.2, 6, slow);
    CHECK(a == b);
    CHECK(a.values != c.values);
}

TEST_CASE("rejection stall")
{
    const FieldCtx F(2);
    const GammaSpec g = GammaSpec::affine(2);
    const Approximator zero([](ExampleOracle&, std::size_t, std::uint64_t) -> std::int64_t { return 0; },
                            ApproxTraits{"zero", 0, 0, 0, true});
    CHECK(code_of([&] { build_psi_table(zero, g, F, 8, 0.1, 0.1, 0.1, 1); }) == Errc::RejectionStall);
    // the low edge sits below d once gamma^{-1}(d) < d - 1
    CHECK(code_of([&] {
              build_psi_table(cheat_band_approximator(g, CheatMode::LowEdge), g, F, 8, 0.1, 0.1, 0.1, 1);
          }) == Errc::RejectionStall);
}

TEST_CASE("json round trip")
{
    const FieldCtx F(3);
    const GammaSpec g = GammaSpec::affine(2);
    PsiTable t = build_psi_table(cheat_band_approximator(g, CheatMode::Midpoint), g, F, 9, 0.2, 1.0 / 144,
                                 0.25, 42);
    t.values[0] = 1.0 / 3.0;
    const std::string text = t.to_json();
    CHECK(text.find("0.333333333333") != std::string::npos);
    CHECK(text.find("0.3333333333333") == std::string::npos);
    CHECK(text.find("\"q\"") < text.find("\"values\""));
    const PsiTable back = PsiTable::from_json(text);
    CHECK(back.to_json() == text);
    CHECK(back.seed == 42);
    CHECK(back.q == 3);
    CHECK(back.values[1] == t.values[1]);
    CHECK(code_of([] { PsiTable::from_json("{\"q\": 2"); }) == Errc::ParseError);
    CHECK(code_of([] { PsiTable::from_json("{\"q\": \"two\"}"); }) == Errc::ParseError);
}

TEST_CASE("estimate on a fixed target")
{
    const FieldCtx F(2);
    const GammaSpec g = GammaSpec::affine(2);
    Rng rng(1);
    const ExampleOracle o = ExampleOracle::simulated(sample_sparse_linear(F, 16, 5, rng), 0.1, 0.1, 2);
    CHECK(estimate_psi_of_target(cheat_band_approximator(g, CheatMode::Exact), o, 16, 0.01, 0.1, 3) == 5.0);
    CHECK(estimate_psi_of_target(cheat_band_approximator(g, CheatMode::Midpoint), o, 16, 0.01, 0.1, 3) == 7.0);
    const ExampleOracle u = ExampleOracle::uniform_labels(F, 16, 0.1, 4);
    CHECK(estimate_psi_of_target(cheat_band_approximator(g, CheatMode::Exact), u, 16, 0.01, 0.1, 3) == 16.0);

    // relabeled views keep sparsity, so the uniform mode estimate concentrates on the band mean
    const ExampleOracle o4 = ExampleOracle::simulated(sample_sparse_linear(F, 4, 3, rng), 0.1, 0.1, 5);
    PsiOptions slow;
    slow.fast_mode = false;
    const double est =
        estimate_psi_of_target(cheat_band_approximator(g, CheatMode::UniformInBand), o4, 4, 0.25, 0.1, 6, slow);
    CHECK(std::abs(est - (2 + 3 + 4 + 4 + 4) / 5.0) <= 0.25);
}

TEST_CASE("gap start bounds")
{
    const GammaSpec g = GammaSpec::affine(2);
    CHECK(max_gap_start(g, 16) == 4);
    CHECK(max_gap_start(g, 9) == 2);
    CHECK(default_gap_start(g, 16) == 1);
    CHECK(default_gap_start(g, 1024) == 2);
}

TEST_CASE("find_gap_k examples")
{
    const GammaSpec g = GammaSpec::affine(2);
    std::vector<double> linear(16);
    for (std::size_t d = 1; d <= 16; ++d)
        linear[d - 1] = static_cast<double>(d);
    CHECK(find_gap_k(table_of(16, linear), g, 1, false) == 1);
    CHECK(find_gap_k(table_of(16, linear), g, 3, true) == 3);

    std::vector<double> step(16, 3.0);
    for (std::size_t d = 7; d <= 16; ++d)
        step[d - 1] = 4.0;
    CHECK(find_gap_k(table_of(16, step), g, 2, false) == 6);
    CHECK(find_gap_k(table_of(16, step), g, 2, true) == 6);
    CHECK(code_of([&] { find_gap_k(table_of(16, step), g, 1, false); }) == Errc::NoGapFound);
    CHECK(code_of([&] { find_gap_k(table_of(16, step), g, 5, false); }) == Errc::PreconditionFailed);
    CHECK(code_of([&] { find_gap_k(table_of(16, step), g, 0, false); }) == Errc::PreconditionFailed);

    // the threshold 7/(8n) is inclusive
    std::vector<double> tight(16, 3.0);
    for (std::size_t d = 3; d <= 16; ++d)
        tight[d - 1] = 3.0 + 7.0 / 128.0;
    CHECK(find_gap_k(table_of(16, tight), g, 1, false) == 2);
    for (std::size_t d = 3; d <= 16; ++d)
        tight[d - 1] = 3.0 + 7.0 / 128.0 - 1e-6;
    CHECK(code_of([&] { find_gap_k(table_of(16, tight), g, 1, false); }) == Errc::NoGapFound);

    // binary uses Psi'(0) = 0 at k = 1
    std::vector<double> flat(16, 0.06);
    CHECK(find_gap_k(table_of(16, flat), g, 1, true) == 1);
    CHECK(code_of([&] { find_gap_k(table_of(16, flat), g, 1, false); }) == Errc::NoGapFound);
}

TEST_CASE("find_gap_k returns the first qualifying k of its range")
{
    Rng rng(77);
    const std::size_t n = 20;
    const GammaSpec g = GammaSpec::affine(1.5);
    const double thr = 7.0 / (8.0 * n);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> v(n);
        double acc = 0;
        for (auto& x : v) {
            acc += rng.bernoulli(0.15) ? thr * 2 : thr * rng.unit() * 0.9;
            x = acc;
        }
        const PsiTable t = table_of(n, v);
        const bool binary = rng.bernoulli(0.5);
        const std::size_t m = 1 + rng.below(max_gap_start(g, n));
        const auto hi = std::min<std::int64_t>(floor_out(g.delta_cap(static_cast<double>(m), n)) + 1,
                                               static_cast<std::int64_t>(n) - 1);
        std::optional<std::size_t> expected;
        for (auto k = static_cast<std::int64_t>(m); k <= hi && !expected; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            const double diff = binary ? t.at(kk + 1) - t.at(kk - 1) : t.at(kk + 1) - t.at(kk);
            if (diff >= thr)
                expected = kk;
        }
        if (expected) {
            REQUIRE(find_gap_k(t, g, m, binary) == *expected);
        } else {
            REQUIRE(code_of([&] { find_gap_k(t, g, m, binary); }) == Errc::NoGapFound);
        }
    }
}
