#include "parlearn/full_learner.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "parlearn/error.hpp"

namespace parlearn {

std::size_t LearnerBudget::reps() const { return boost_reps > 0 ? boost_reps : parlearn::boost_reps(delta); }

std::shared_ptr<BudgetMeter> LearnerBudget::meter() const
{
    if (max_examples == 0 && max_wall_ms == 0)
        return nullptr;
    return std::make_shared<BudgetMeter>(max_examples, max_wall_ms);
}

LinearFn learn_d_sparse_via_shift(const SparseLearner& learner_k, std::size_t k, std::size_t d,
                                  ExampleOracle& oracle, const GammaSpec& gamma, const LearnerBudget& budget,
                                  std::uint64_t seed)
{
    const std::size_t n = oracle.dim();
    if (d > k || k > n)
        throw Error(Errc::PreconditionFailed, "shift reduction needs d <= k <= n");
    if (d > 0) {
        const double G = gamma.big_gamma(static_cast<double>(d));
        if (12.0 * G * G > static_cast<double>(n) + kBandSlack)
            throw Error(Errc::PreconditionFailed, "12 Gamma(d)^2 exceeds n");
    }
    if (d == k)
        return learner_k(oracle, derive_seed(seed, "shift/direct"));

    const FieldCtx& ctx = oracle.field();
    auto run = [&](std::size_t r) {
        Rng rng(derive_seed(seed, "shift/indices", r));
        std::vector<LinearFn::Term> terms;
        for (std::size_t i : sample_distinct(n, k - d, rng))
            terms.push_back({i, 1});
        const LinearFn shift = LinearFn::from_terms(ctx, n, std::move(terms));
        ExampleOracle view = oracle.with(ShiftLabel{shift});
        return learner_k(view, derive_seed(seed, "shift/learn", r)) - shift;
    };
    ModeResult res = boost_mode(run, budget.reps());
    if (!res.majority)
        throw Error(Errc::NoMajority, "modal hypothesis won " + std::to_string(res.count) + " of " +
                                          std::to_string(res.reps) + " repetitions");
    return *res.mode;
}

std::size_t padded_dimension(const GammaSpec& gamma, std::size_t n)
{
    const double G = gamma.big_gamma(static_cast<double>(n));
    return static_cast<std::size_t>(ceil_out(12.0 * G * G));
}

std::pair<ExampleOracle, std::size_t> pad_to_big_n(const ExampleOracle& oracle, const GammaSpec& gamma,
                                                   std::uint64_t seed)
{
    const std::size_t N = std::max(padded_dimension(gamma, oracle.dim()), oracle.dim());
    return {oracle.with(PadExample{N}, seed), N};
}

std::vector<double> eta_grid(double eta_bound, std::size_t steps)
{
    if (steps == 0)
        throw Error(Errc::OutOfDomain, "grid needs at least one step");
    std::vector<double> grid(steps);
    for (std::size_t j = 1; j <= steps; ++j)
        grid[j - 1] = static_cast<double>(j) * eta_bound / static_cast<double>(steps);
    grid.back() = eta_bound;
    return grid;
}

SweepResult eta_sweep(const SparseLearner& learn_at_eta_b, ExampleOracle& oracle, std::size_t grid_steps,
                      double delta, std::uint64_t seed)
{
    const double eta_b = oracle.eta_bound();
    SweepResult out{LinearFn(oracle.field(), oracle.dim()), {}, grid_steps, 0};

    auto run_at = [&](double eta_j, std::uint64_t j) -> std::uint64_t {
        ExampleOracle view = oracle.with(MagnifyNoise{eta_j, eta_b}, derive_seed(seed, "sweep/layer", j));
        try {
            out.pool.push_back(learn_at_eta_b(view, derive_seed(seed, "sweep/learn", j)));
        } catch (const Error& e) {
            if (e.code() == Errc::BudgetExceeded)
                throw;
            ++out.failed_runs;
        }
        return view.draws();
    };

    bool pilot_done = false;
    if (grid_steps == 0) {
        const double Q = static_cast<double>(run_at(eta_b, 0));
        grid_steps = static_cast<std::size_t>(std::min(1.0 + std::ceil(10.0 * Q), 1e4));
        out.grid_steps = grid_steps;
        pilot_done = true;
    }
    const std::vector<double> grid = eta_grid(eta_b, grid_steps);
    for (std::size_t j = 1; j <= grid.size(); ++j) {
        if (pilot_done && j == grid.size())
            break;
        oracle.poll_budget();
        run_at(grid[j - 1], j);
    }
    if (out.pool.empty())
        throw Error(Errc::AllRunsFailed, "no grid point produced a hypothesis");
    out.best = hypothesis_select(out.pool, oracle, eta_b, delta).best;
    return out;
}

std::string FullResult::pool_jsonl() const
{
    std::string out;
    for (std::size_t c = 0; c < selection.candidates.size(); ++c) {
        nlohmann::ordered_json j;
        j["coefficients"] = selection.candidates[c].coeffs();
        j["agreement"] = selection.agreement[c];
        j["selected"] = selection.candidates[c] == best;
        out += j.dump() + "\n";
    }
    return out;
}

FullResult learn_parity_full(const Approximator& A, const GammaSpec& gamma, ExampleOracle& oracle,
                             std::uint64_t seed, const FullOptions& options, const PsiTable* prebuilt)
{
    const FieldCtx& ctx = oracle.field();
    const std::size_t n = oracle.dim();
    const double delta = options.budget.delta;
    auto [padded, N] = pad_to_big_n(oracle, gamma, derive_seed(seed, "full/pad"));

    PsiTable built;
    if (!prebuilt) {
        built = build_psi_table(A, gamma, ctx, N, oracle.eta_bound(), reduction_table_h(N), delta / 4.0,
                                derive_seed(seed, "full/table"), options.reduction.psi);
        prebuilt = &built;
    } else if (prebuilt->n != N || prebuilt->q != ctx.q()) {
        throw Error(Errc::DimensionMismatch, "prebuilt table does not match the padded dimension");
    }

    FullResult out{LinearFn(ctx, n), N, {}, {LinearFn(ctx, n), {}, {}, 0}, 0, {}};
    out.pool.push_back({0, 0, LinearFn(ctx, n)});
    const double per_d = delta / (2.0 * static_cast<double>(n));
    for (std::size_t d = 1; d <= n; ++d) {
        oracle.poll_budget();
        try {
            const std::size_t k = find_gap_k(*prebuilt, gamma, d, ctx.is_binary());
            SparseLearner learner = [&, k](ExampleOracle& stream, std::uint64_t s) {
                return learn_k_sparse(A, gamma, *prebuilt, k, stream, per_d, s, options.reduction).hypothesis;
            };
            LearnerBudget inner = options.budget;
            inner.delta = per_d;
            const LinearFn g =
                learn_d_sparse_via_shift(learner, k, d, padded, gamma, inner, derive_seed(seed, "full/d", d));
            if (!g.fits_in(n)) {
                ++out.discarded;
                continue;
            }
            out.pool.push_back({d, k, g.projected(n)});
        } catch (const Error& e) {
            if (e.code() == Errc::BudgetExceeded)
                throw;
            out.failures.emplace_back(d, e.what());
        }
    }
    std::vector<LinearFn> cands;
    for (const auto& e : out.pool)
        cands.push_back(e.hypothesis);
    out.selection = hypothesis_select(cands, oracle, oracle.eta_bound(), delta / 2.0);
    out.best = out.selection.best;
    return out;
}

} // namespace parlearn
