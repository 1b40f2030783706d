#include "parlearn/sparse_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

#include "parlearn/error.hpp"
#include "parlearn/selection.hpp"

namespace parlearn {

namespace {

constexpr double kEdge = 1e-12;

bool in_band(double x, double centre, double half_width) { return std::abs(x - centre) <= half_width + kEdge; }

Elem smallest_alpha(const FieldCtx& ctx) { return ctx.q() > 2 ? 2 : 1; }

void check_table(const PsiTable& table, const ExampleOracle& oracle, std::size_t n, std::size_t k)
{
    if (table.n != n || oracle.dim() != n)
        throw Error(Errc::DimensionMismatch, "table, oracle and n disagree on the dimension");
    if (k < 1 || k >= n)
        throw Error(Errc::OutOfDomain, "k must lie in [1, n - 1]");
}

} // namespace

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Relevant: return "relevant";
    case Verdict::Irrelevant: return "irrelevant";
    case Verdict::Undecided: return "undecided";
    }
    return "?";
}

std::string to_string(RelevanceMethod m) { return m == RelevanceMethod::Psi ? "psi" : "distinguisher"; }
std::string to_string(CoeffMethod m) { return m == CoeffMethod::Psi ? "psi-coeff" : "gauss-coeff"; }

RelevanceMethod parse_relevance_method(const std::string& name)
{
    if (name == "psi")
        return RelevanceMethod::Psi;
    if (name == "distinguisher")
        return RelevanceMethod::Distinguisher;
    throw Error(Errc::ParseError, "unknown relevance method '" + name + "'");
}

CoeffMethod parse_coeff_method(const std::string& name)
{
    if (name == "psi-coeff" || name == "psi")
        return CoeffMethod::Psi;
    if (name == "gauss-coeff" || name == "gauss")
        return CoeffMethod::Gauss;
    throw Error(Errc::ParseError, "unknown coefficient method '" + name + "'");
}

std::vector<std::size_t> RelevanceReport::relevant() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < verdicts.size(); ++i)
        if (verdicts[i] == Verdict::Relevant)
            out.push_back(i);
    return out;
}

std::vector<std::size_t> RelevanceReport::irrelevant() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < verdicts.size(); ++i)
        if (verdicts[i] == Verdict::Irrelevant)
            out.push_back(i);
    return out;
}

std::size_t RelevanceReport::undecided() const
{
    return static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), Verdict::Undecided));
}

std::string RelevanceReport::to_json() const
{
    nlohmann::ordered_json j;
    j["method"] = to_string(method);
    j["n"] = n;
    j["k"] = k;
    if (method == RelevanceMethod::Psi) {
        j["alpha"] = alpha;
        j["half_width"] = half_width;
        j["centres"] = {centre_low, centre_mid, centre_high};
    } else {
        j["threshold"] = centre_mid;
    }
    j["relevant"] = relevant();
    auto& rows = j["variables"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        nlohmann::ordered_json row;
        row["index"] = i;
        row["verdict"] = to_string(verdicts[i]);
        row["score"] = score[i];
        if (!score_alpha.empty())
            row["score_alpha"] = score_alpha[i];
        rows.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

RelevanceReport classify_variables_psi(const Approximator& A, const PsiTable& table, std::size_t k,
                                       const ExampleOracle& oracle, std::size_t n, double delta, std::uint64_t seed,
                                       const PsiOptions& options)
{
    check_table(table, oracle, n, k);
    const FieldCtx& ctx = oracle.field();
    const bool binary = ctx.is_binary();
    const double nn = static_cast<double>(n);

    RelevanceReport rep;
    rep.method = RelevanceMethod::Psi;
    rep.n = n;
    rep.k = k;
    rep.alpha = smallest_alpha(ctx);
    rep.half_width = 1.0 / (8.0 * nn);
    rep.centre_low = table.at(k - 1);
    rep.centre_mid = table.at(k);
    rep.centre_high = table.at(k + 1);

    const double lower = binary ? rep.centre_low : rep.centre_mid;
    if (lower + rep.half_width >= rep.centre_high - rep.half_width)
        throw Error(Errc::IntervalOverlap, "accept bands around Psi'(" + std::to_string(binary ? k - 1 : k) +
                                               ") and Psi'(" + std::to_string(k + 1) + ") overlap");

    const double h = 1.0 / (16.0 * nn);
    const double each = delta / (8.0 * nn);
    rep.verdicts.assign(n, Verdict::Undecided);
    rep.score.assign(n, 0.0);
    if (!binary)
        rep.score_alpha.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const ExampleOracle one = oracle.with(ShiftLabel{LinearFn::monomial(ctx, n, i)});
        rep.score[i] = estimate_psi_of_target(A, one, n, h, each, derive_seed(seed, "classify/one", i), options);
        if (binary) {
            if (in_band(rep.score[i], rep.centre_low, rep.half_width))
                rep.verdicts[i] = Verdict::Relevant;
            else if (in_band(rep.score[i], rep.centre_high, rep.half_width))
                rep.verdicts[i] = Verdict::Irrelevant;
            continue;
        }
        const ExampleOracle two = oracle.with(ShiftLabel{LinearFn::monomial(ctx, n, i, rep.alpha)});
        rep.score_alpha[i] =
            estimate_psi_of_target(A, two, n, h, each, derive_seed(seed, "classify/alpha", i), options);
        if (in_band(rep.score[i], rep.centre_mid, rep.half_width) ||
            in_band(rep.score_alpha[i], rep.centre_mid, rep.half_width))
            rep.verdicts[i] = Verdict::Relevant;
        else if (in_band(rep.score[i], rep.centre_high, rep.half_width) &&
                 in_band(rep.score_alpha[i], rep.centre_high, rep.half_width))
            rep.verdicts[i] = Verdict::Irrelevant;
    }
    return rep;
}

RelevanceReport identify_relevant_distinguisher(const Approximator& A, const GammaSpec& gamma, std::size_t n,
                                                std::size_t k1, const ExampleOracle& oracle, std::size_t trials,
                                                double delta, std::uint64_t seed)
{
    if (oracle.dim() != n)
        throw Error(Errc::DimensionMismatch, "oracle dimension differs from n");
    if (k1 < 1)
        throw Error(Errc::PreconditionFailed, "distinguisher needs k1 >= 1");
    const std::int64_t threshold = floor_out(gamma.eval(static_cast<double>(k1)));
    const double k2 = gamma.eval(static_cast<double>(threshold + 1));
    if (ceil_out(k2) > static_cast<std::int64_t>(n))
        throw Error(Errc::PreconditionFailed, "gamma(gamma(k1) + 1) exceeds n");
    if (trials == 0) {
        if (!(delta > 0) || !(delta < 1))
            throw Error(Errc::OutOfDomain, "need 0 < delta < 1");
        trials = static_cast<std::size_t>(std::ceil(18.0 * std::log(2.0 * static_cast<double>(n) / delta)));
    }
    const Approximator& raw = A.unclamped();
    // true when B answers like a uniform-label stream
    auto looks_random = [&](ExampleOracle& stream, std::uint64_t s) { return raw(stream, n, s) > threshold; };

    std::size_t random_hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        ExampleOracle u = ExampleOracle::uniform_labels(oracle.field(), n, oracle.eta_bound(),
                                                        derive_seed(seed, "distinguisher/calibrate", t));
        random_hits += looks_random(u, derive_seed(seed, "distinguisher/calibrate-approx", t));
    }
    const std::size_t stable = std::max(random_hits, trials - random_hits);
    if (3 * stable < 2 * trials)
        throw Error(Errc::CalibrationAmbiguous, "answers on uniform-label streams are unstable");
    if (2 * random_hits <= trials)
        throw Error(Errc::CalibrationAmbiguous, "uniform-label streams are answered like k1-sparse ones");

    ExampleOracle base = oracle;
    std::size_t base_random = 0;
    for (std::size_t t = 0; t < trials; ++t)
        base_random += looks_random(base, derive_seed(seed, "distinguisher/baseline", t));
    if (2 * base_random >= trials)
        throw Error(Errc::ContractViolation, "raw stream is not answered as k1-sparse");

    RelevanceReport rep;
    rep.method = RelevanceMethod::Distinguisher;
    rep.n = n;
    rep.k = k1;
    rep.centre_mid = static_cast<double>(threshold);
    rep.verdicts.assign(n, Verdict::Undecided);
    rep.score.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t iseed = derive_seed(seed, "distinguisher/index", i);
        ExampleOracle view = oracle.with(RandomizeCoordinate{i}, derive_seed(iseed, "layer"));
        std::size_t hits = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            view.poll_budget();
            hits += looks_random(view, derive_seed(iseed, "approx", t));
        }
        rep.score[i] = static_cast<double>(hits) / static_cast<double>(trials);
        if (2 * hits > trials)
            rep.verdicts[i] = Verdict::Relevant;
        else if (2 * hits < trials)
            rep.verdicts[i] = Verdict::Irrelevant;
    }
    return rep;
}

LinearFn recover_coefficients_psi(const Approximator& A, const PsiTable& table, std::size_t k,
                                  const ExampleOracle& oracle, const std::vector<std::size_t>& relevant,
                                  std::size_t n, double delta, std::uint64_t seed, const PsiOptions& options)
{
    const FieldCtx& ctx = oracle.field();
    std::vector<LinearFn::Term> terms;
    if (ctx.is_binary()) {
        for (std::size_t i : relevant)
            terms.push_back({i, 1});
        return LinearFn::from_terms(ctx, n, std::move(terms));
    }
    check_table(table, oracle, n, k);
    std::vector<bool> is_rel(n, false);
    for (std::size_t i : relevant) {
        if (i >= n)
            throw Error(Errc::OutOfDomain, "relevant index out of range");
        is_rel[i] = true;
    }
    const auto spare = std::find(is_rel.begin(), is_rel.end(), false);
    if (spare == is_rel.end())
        throw Error(Errc::NoIrrelevantIndex, "every variable is relevant");
    const std::size_t j = static_cast<std::size_t>(spare - is_rel.begin());

    const double nn = static_cast<double>(n);
    const double h = 1.0 / (16.0 * nn);
    const double w = 1.0 / (8.0 * nn);
    const double centre = table.at(k);
    const double each = delta / static_cast<double>(std::max<std::size_t>(1, relevant.size() * (ctx.q() - 1)));
    for (std::size_t i : relevant) {
        std::vector<Elem> hits;
        for (Elem alpha = 1; alpha < ctx.q(); ++alpha) {
            const LinearFn shift = LinearFn::from_terms(ctx, n, {{i, ctx.neg(alpha)}, {j, 1}});
            const ExampleOracle view = oracle.with(ShiftLabel{shift});
            const double psi = estimate_psi_of_target(A, view, n, h, each,
                                                      derive_seed(seed, "coeff", i * ctx.q() + alpha), options);
            if (in_band(psi, centre, w))
                hits.push_back(alpha);
        }
        if (hits.size() != 1)
            throw Error(Errc::AmbiguousCoefficient, std::to_string(hits.size()) +
                                                        " coefficient values accepted for x" + std::to_string(i));
        terms.push_back({i, hits.front()});
    }
    return LinearFn::from_terms(ctx, n, std::move(terms));
}

std::size_t gauss_iterations(std::size_t k, double eta_bound, double delta)
{
    if (!(eta_bound >= 0) || !(eta_bound < 1) || !(delta > 0) || !(delta < 1))
        throw Error(Errc::BadRates, "need 0 <= eta_bound < 1 and 0 < delta < 1");
    const double boost = std::pow(1.0 / (1.0 - eta_bound), static_cast<double>(k));
    return static_cast<std::size_t>(std::ceil(4.0 * boost * std::log(3.0 / delta)));
}

std::optional<std::vector<Elem>> solve_linear_system(const FieldCtx& ctx, std::vector<std::vector<Elem>> M,
                                                     std::vector<Elem> rhs)
{
    const std::size_t k = M.size();
    if (rhs.size() != k)
        throw Error(Errc::DimensionMismatch, "right-hand side length differs from the row count");
    for (const auto& row : M)
        if (row.size() != k)
            throw Error(Errc::DimensionMismatch, "system matrix is not square");
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        while (piv < k && M[piv][col] == 0)
            ++piv;
        if (piv == k)
            return std::nullopt;
        std::swap(M[piv], M[col]);
        std::swap(rhs[piv], rhs[col]);
        const Elem inv = ctx.inv(M[col][col]);
        for (std::size_t c = col; c < k; ++c)
            M[col][c] = ctx.mul(M[col][c], inv);
        rhs[col] = ctx.mul(rhs[col], inv);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col || M[r][col] == 0)
                continue;
            const Elem factor = M[r][col];
            for (std::size_t c = col; c < k; ++c)
                M[r][c] = ctx.sub(M[r][c], ctx.mul(factor, M[col][c]));
            rhs[r] = ctx.sub(rhs[r], ctx.mul(factor, rhs[col]));
        }
    }
    return rhs;
}

GaussResult recover_coefficients_gauss(const std::vector<std::size_t>& relevant, ExampleOracle& oracle,
                                       double eta_bound, double delta, std::size_t iterations)
{
    const FieldCtx& ctx = oracle.field();
    const std::size_t n = oracle.dim();
    const std::size_t k = relevant.size();
    GaussResult out;
    if (k == 0) {
        out.candidates.emplace_back(ctx, n);
        out.first_seen.push_back(0);
        return out;
    }
    for (std::size_t i : relevant)
        if (i >= n)
            throw Error(Errc::OutOfDomain, "relevant index out of range");
    const std::size_t t = iterations > 0 ? iterations : gauss_iterations(k, eta_bound, delta);
    for (std::size_t it = 0; it < t; ++it) {
        oracle.poll_budget();
        ++out.iterations;
        std::vector<std::vector<Elem>> M(k, std::vector<Elem>(k));
        std::vector<Elem> rhs(k);
        for (std::size_t r = 0; r < k; ++r) {
            const LabeledExample ex = oracle.next();
            for (std::size_t c = 0; c < k; ++c)
                M[r][c] = ex.a[relevant[c]];
            rhs[r] = ex.b;
        }
        const auto sol = solve_linear_system(ctx, M, rhs);
        if (!sol) {
            ++out.singular;
            continue;
        }
        for (std::size_t r = 0; r < k; ++r) {
            Elem acc = 0;
            for (std::size_t c = 0; c < k; ++c)
                acc = ctx.add(acc, ctx.mul(M[r][c], (*sol)[c]));
            if (acc != rhs[r])
                throw Error(Errc::ContractViolation, "eliminated solution does not satisfy its system");
        }
        std::vector<LinearFn::Term> terms;
        for (std::size_t c = 0; c < k; ++c)
            if ((*sol)[c] != 0)
                terms.push_back({relevant[c], (*sol)[c]});
        LinearFn cand = LinearFn::from_terms(ctx, n, std::move(terms));
        if (std::find(out.candidates.begin(), out.candidates.end(), cand) == out.candidates.end()) {
            out.candidates.push_back(std::move(cand));
            out.first_seen.push_back(out.iterations);
        }
    }
    return out;
}

LearnResult learn_k_sparse(const Approximator& A, const GammaSpec& gamma, const PsiTable& table, std::size_t k,
                           ExampleOracle& oracle, double delta, std::uint64_t seed, const ReductionOptions& options)
{
    const std::size_t n = oracle.dim();
    RelevanceReport report;
    try {
        if (options.relevance == RelevanceMethod::Psi)
            report = classify_variables_psi(A, table, k, oracle, n, delta / 8.0, derive_seed(seed, "classify"),
                                            options.psi);
        else
            report = identify_relevant_distinguisher(A, gamma, n, k, oracle, options.distinguisher_trials,
                                                     delta / 8.0, derive_seed(seed, "distinguisher"));
    } catch (const Error& e) {
        if (e.code() == Errc::IntervalOverlap)
            throw Error(Errc::ContractViolation, e.what());
        throw;
    }
    if (report.undecided() > 0)
        throw Error(Errc::ContractViolation, std::to_string(report.undecided()) + " variables left undecided");
    const std::vector<std::size_t> rel = report.relevant();

    LearnResult out{LinearFn(oracle.field(), n), k, std::move(report), {}};
    if (options.coeff == CoeffMethod::Psi) {
        out.hypothesis = recover_coefficients_psi(A, table, k, oracle, rel, n, delta / 4.0,
                                                  derive_seed(seed, "coeff"), options.psi);
        out.candidates = {out.hypothesis};
        return out;
    }
    GaussResult g = recover_coefficients_gauss(rel, oracle, oracle.eta_bound(), delta / 4.0);
    SelectionResult sel = hypothesis_select(g.candidates, oracle, oracle.eta_bound(), delta / 4.0);
    out.hypothesis = sel.best;
    out.candidates = std::move(sel.candidates);
    return out;
}

LearnResult learn_sparse_k(const Approximator& A, const GammaSpec& gamma, std::size_t m, ExampleOracle& oracle,
                           double delta, std::uint64_t seed, const ReductionOptions& options, const PsiTable* prebuilt)
{
    const std::size_t n = oracle.dim();
    PsiTable built;
    if (!prebuilt) {
        built = build_psi_table(A, gamma, oracle.field(), n, oracle.eta_bound(), reduction_table_h(n), delta / 4.0,
                                derive_seed(seed, "table"), options.psi);
        prebuilt = &built;
    } else if (prebuilt->n != n || prebuilt->q != oracle.field().q()) {
        throw Error(Errc::DimensionMismatch, "prebuilt table does not match the oracle");
    }
    std::size_t k = 0;
    try {
        k = find_gap_k(*prebuilt, gamma, m, oracle.field().is_binary());
    } catch (const Error& e) {
        if (e.code() == Errc::NoGapFound)
            throw Error(Errc::ContractViolation, e.what());
        throw;
    }
    return learn_k_sparse(A, gamma, *prebuilt, k, oracle, delta, seed, options);
}

} // namespace parlearn
