#include "parlearn/psi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "parlearn/error.hpp"
#include "parlearn/linear_fn.hpp"

namespace parlearn {

namespace {

double round12(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

void check_accuracy(std::size_t n, double h, double delta)
{
    if (n == 0)
        throw Error(Errc::OutOfDomain, "dimension must be positive");
    if (!(h > 0) || !(delta > 0) || !(delta < 1))
        throw Error(Errc::OutOfDomain, "need h > 0 and 0 < delta < 1");
}

std::size_t hoeffding_count(std::size_t n, double h, double log_term)
{
    const double nn = static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(nn * nn / (2.0 * h * h) * log_term));
}

} // namespace

double PsiTable::at(std::size_t d) const
{
    if (d == 0)
        return 0.0;
    if (d > values.size())
        throw Error(Errc::OutOfDomain, "table has no entry for d = " + std::to_string(d));
    return values[d - 1];
}

std::string PsiTable::to_json() const
{
    nlohmann::ordered_json j;
    j["q"] = q;
    j["n"] = n;
    j["eta_bound"] = round12(eta_bound);
    j["h"] = round12(h);
    j["gamma"] = gamma;
    j["approximator"] = approximator;
    j["seed"] = seed;
    j["trials_per_d"] = trials_per_d;
    auto& vals = j["values"] = nlohmann::ordered_json::array();
    for (double v : values)
        vals.push_back(round12(v));
    return j.dump(2) + "\n";
}

PsiTable PsiTable::from_json(const std::string& text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        PsiTable t;
        t.q = j.at("q").get<std::uint64_t>();
        t.n = j.at("n").get<std::size_t>();
        t.eta_bound = j.at("eta_bound").get<double>();
        t.h = j.at("h").get<double>();
        t.gamma = j.at("gamma").get<std::string>();
        t.approximator = j.at("approximator").get<std::string>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.trials_per_d = j.at("trials_per_d").get<std::size_t>();
        t.values = j.at("values").get<std::vector<double>>();
        if (t.values.size() != t.n)
            throw Error(Errc::ParseError, "table holds " + std::to_string(t.values.size()) + " values for n = " +
                                              std::to_string(t.n));
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad table document: ") + e.what());
    }
}

std::size_t psi_table_trials(std::size_t n, double h, double delta)
{
    check_accuracy(n, h, delta);
    return hoeffding_count(n, h, std::log(4.0 * static_cast<double>(n) / delta));
}

std::size_t psi_estimate_iterations(std::size_t n, double h, double delta)
{
    check_accuracy(n, h, delta);
    return hoeffding_count(n, h, std::log(2.0 / delta));
}

PsiTable build_psi_table(const Approximator& A, const GammaSpec& gamma, const FieldCtx& ctx, std::size_t n,
                         double eta_bound, double h, double delta, std::uint64_t seed, const PsiOptions& options)
{
    if (!(h > 0) || !(h < 1))
        throw Error(Errc::OutOfDomain, "table accuracy h must lie in (0, 1)");
    const bool fast = options.fast_mode && A.traits().deterministic_given_d;
    const std::size_t trials = fast ? 1 : psi_table_trials(n, h, delta);
    const std::size_t top = options.max_d == 0 ? n : std::min(options.max_d, n);

    PsiTable table;
    table.q = ctx.q();
    table.n = n;
    table.eta_bound = eta_bound;
    table.h = h;
    table.gamma = gamma.descriptor();
    table.approximator = A.traits().descriptor;
    table.seed = seed;
    table.trials_per_d = trials;
    table.values.assign(n, 0.0);

    constexpr std::size_t kWindow = 1000;
    for (std::size_t d = 1; d <= n; ++d) {
        const std::int64_t hi = floor_out(gamma.delta_cap(static_cast<double>(d), n));
        if (d > top) {
            table.values[d - 1] = static_cast<double>(hi);
            continue;
        }
        const std::uint64_t dseed = derive_seed(seed, "psi-table/d", d);
        double sum = 0;
        std::size_t accepted = 0;
        std::size_t window_attempts = 0;
        std::size_t window_accepted = 0;
        for (std::uint64_t attempt = 0; accepted < trials; ++attempt) {
            const std::uint64_t tseed = derive_seed(dseed, "trial", attempt);
            Rng rng(derive_seed(tseed, "target"));
            ExampleOracle oracle = ExampleOracle::simulated(sample_sparse_linear(ctx, n, d, rng), eta_bound,
                                                            eta_bound, derive_seed(tseed, "oracle"));
            const std::int64_t D = A(oracle, n, derive_seed(tseed, "approx"));
            ++window_attempts;
            if (D >= static_cast<std::int64_t>(d) && D <= hi) {
                sum += static_cast<double>(D);
                ++accepted;
                ++window_accepted;
            }
            if (window_attempts == kWindow) {
                if (2 * window_accepted < kWindow)
                    throw Error(Errc::RejectionStall, "acceptance below 1/2 at d = " + std::to_string(d));
                window_attempts = window_accepted = 0;
            }
        }
        table.values[d - 1] = sum / static_cast<double>(trials);
    }
    return table;
}

double estimate_psi_of_target(const Approximator& A, const ExampleOracle& oracle, std::size_t n, double h,
                              double delta, std::uint64_t seed, const PsiOptions& options)
{
    if (oracle.dim() != n)
        throw Error(Errc::DimensionMismatch, "oracle dimension differs from n");
    const bool fast = options.fast_mode && A.traits().deterministic_given_d;
    const std::size_t tau = fast ? 1 : psi_estimate_iterations(n, h, delta);
    double sum = 0;
    for (std::size_t it = 0; it < tau; ++it) {
        oracle.poll_budget();
        auto map = Relabeling::random(oracle.field(), n, derive_seed(seed, "psi-estimate/map", it));
        ExampleOracle view = oracle.with(PermuteScale{std::move(map)});
        sum += static_cast<double>(A(view, n, derive_seed(seed, "psi-estimate/approx", it)));
    }
    return sum / static_cast<double>(tau);
}

std::size_t max_gap_start(const GammaSpec& gamma, std::size_t n)
{
    const double x = gamma.inverse(gamma.inverse(static_cast<double>(n)));
    return static_cast<std::size_t>(std::max<std::int64_t>(0, floor_out(x)));
}

std::size_t default_gap_start(const GammaSpec& gamma, std::size_t n)
{
    const double pi = std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2))));
    const std::int64_t m = floor_out(gamma.inverse(gamma.inverse(pi)));
    return static_cast<std::size_t>(std::max<std::int64_t>(1, m));
}

std::size_t find_gap_k(const PsiTable& table, const GammaSpec& gamma, std::size_t m, bool binary)
{
    const std::size_t n = table.n;
    if (m < 1 || m > max_gap_start(gamma, n))
        throw Error(Errc::PreconditionFailed,
                    "gap search start m = " + std::to_string(m) + " outside [1, gamma^-1(gamma^-1(n))]");
    const double need = 7.0 / (8.0 * static_cast<double>(n));
    const std::int64_t upper = std::min<std::int64_t>(
        floor_out(gamma.delta_cap(static_cast<double>(m), n)) + 1, static_cast<std::int64_t>(n) - 1);
    for (std::size_t k = m; static_cast<std::int64_t>(k) <= upper; ++k) {
        const double gap = table.at(k + 1) - (binary ? table.at(k - 1) : table.at(k));
        if (gap >= need)
            return k;
    }
    throw Error(Errc::NoGapFound, "no gap of 7/(8n) in [" + std::to_string(m) + ", " + std::to_string(upper) + "]");
}

} // namespace parlearn
