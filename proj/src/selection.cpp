#include "parlearn/selection.hpp"

#include <algorithm>
#include <cmath>

#include "parlearn/error.hpp"

namespace parlearn {

std::size_t selection_sample_count(std::size_t num_candidates, double delta, double eta_bound, std::uint64_t q)
{
    const double margin = 1.0 - eta_bound - 1.0 / static_cast<double>(q);
    if (!(margin > 0) || !(delta > 0) || !(delta < 1))
        throw Error(Errc::BadRates, "selection needs 0 < delta < 1 and eta_bound < 1 - 1/q");
    const double c = static_cast<double>(std::max<std::size_t>(num_candidates, 1));
    return static_cast<std::size_t>(std::ceil(32.0 * std::log(2.0 * c / delta) / (margin * margin)));
}

SelectionResult hypothesis_select(const std::vector<LinearFn>& candidates, ExampleOracle& oracle, double eta_bound,
                                  double delta)
{
    if (candidates.empty())
        throw Error(Errc::EmptyCandidateSet, "no hypotheses to select from");
    std::vector<LinearFn> pool;
    for (const auto& c : candidates) {
        if (c.dim() != oracle.dim())
            throw Error(Errc::DimensionMismatch, "candidate dimension differs from the oracle");
        if (std::find(pool.begin(), pool.end(), c) == pool.end())
            pool.push_back(c);
    }
    const std::size_t Q = selection_sample_count(pool.size(), delta, eta_bound, oracle.field().q());
    std::vector<std::size_t> hits(pool.size(), 0);
    for (std::size_t s = 0; s < Q; ++s) {
        if (s % 4096 == 0)
            oracle.poll_budget();
        const LabeledExample ex = oracle.next();
        for (std::size_t c = 0; c < pool.size(); ++c)
            hits[c] += pool[c](ex.a) == ex.b;
    }
    const auto best = static_cast<std::size_t>(std::max_element(hits.begin(), hits.end()) - hits.begin());
    SelectionResult out{pool[best], pool, {}, Q};
    out.agreement.reserve(pool.size());
    for (std::size_t h : hits)
        out.agreement.push_back(static_cast<double>(h) / static_cast<double>(Q));
    return out;
}

ModeResult boost_mode(const std::function<LinearFn(std::size_t)>& learner, std::size_t reps)
{
    if (reps == 0)
        throw Error(Errc::OutOfDomain, "boosting needs at least one repetition");
    std::vector<std::pair<LinearFn, std::size_t>> tally;
    ModeResult out;
    out.reps = reps;
    for (std::size_t r = 0; r < reps; ++r) {
        ++out.runs;
        std::optional<LinearFn> h;
        try {
            h = learner(r);
        } catch (const Error& e) {
            if (e.code() == Errc::BudgetExceeded)
                throw;
            continue;
        }
        ++out.successes;
        auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& p) { return p.first == *h; });
        if (it == tally.end()) {
            tally.emplace_back(std::move(*h), 1);
            it = tally.end() - 1;
        } else {
            ++it->second;
        }
        if (2 * it->second > reps)
            break;
    }
    const auto best = std::max_element(tally.begin(), tally.end(),
                                        [](const auto& a, const auto& b) { return a.second < b.second; });
    if (best != tally.end()) {
        out.mode = best->first;
        out.count = best->second;
        out.majority = 2 * out.count > reps;
    }
    return out;
}

} // namespace parlearn
