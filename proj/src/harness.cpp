#include "parlearn/harness.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "parlearn/error.hpp"
#include "parlearn/selection.hpp"

namespace parlearn {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& what)
{
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw Error(Errc::ParseError, "bad " + what + " '" + text + "'");
    return value;
}

bool parse_bool(const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw Error(Errc::ParseError, "bad boolean '" + text + "'");
}

std::string fmt_double(double x)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define PL_INT(member)                                                                                             \
    Field{#member,                                                                                                 \
          [](ExperimentConfig& c, const std::string& v) { c.member = parse_number<decltype(c.member)>(v, #member); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define PL_REAL(member)                                                                                            \
    Field{#member, [](ExperimentConfig& c, const std::string& v) { c.member = parse_number<double>(v, #member); },  \
          [](const ExperimentConfig& c) { return fmt_double(c.member); }}
#define PL_BOOL(member)                                                                                            \
    Field{#member, [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(v); },                     \
          [](const ExperimentConfig& c) { return fmt_bool(c.member); }}
#define PL_STR(member)                                                                                             \
    Field{#member, [](ExperimentConfig& c, const std::string& v) { c.member = v; },                                 \
          [](const ExperimentConfig& c) { return c.member; }}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        PL_INT(q),          PL_INT(n),           PL_INT(d),           PL_STR(gamma),
        PL_STR(approximator), PL_BOOL(clamp),    PL_REAL(approx_delta), PL_REAL(eta),
        PL_REAL(eta_bound), PL_BOOL(sweep),      PL_INT(grid_steps),  PL_STR(pipeline),
        PL_STR(relevance),  PL_STR(coeff),       PL_BOOL(fast_mode),  PL_INT(m),
        PL_INT(distinguisher_trials), PL_REAL(delta), PL_INT(boost_reps), PL_INT(max_examples),
        PL_INT(max_wall_ms), PL_INT(seed),       PL_STR(trial_label), PL_INT(pool_size),
    };
    return table;
}

#undef PL_INT
#undef PL_REAL
#undef PL_BOOL
#undef PL_STR

const Field& field_named(const std::string& key)
{
    for (const auto& f : fields())
        if (key == f.name)
            return f;
    throw Error(Errc::ParseError, "unknown key '" + key + "'");
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Key/value lines with their 1-based positions.
struct Entry {
    std::size_t line;
    std::size_t column;
    std::string key;
    std::string value;
};

std::vector<Entry> split_entries(const std::string& text)
{
    std::vector<Entry> out;
    std::istringstream in(text);
    std::string raw;
    for (std::size_t line = 1; std::getline(in, raw); ++line) {
        std::string body = raw.substr(0, raw.find('#'));
        if (trim(body).empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            const auto col = body.find_first_not_of(" \t") + 1;
            throw Error(Errc::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                                              ": expected 'key = value'");
        }
        const auto vcol = body.find_first_not_of(" \t", eq + 1);
        out.push_back({line, vcol == std::string::npos ? eq + 2 : vcol + 1, trim(body.substr(0, eq)),
                       trim(body.substr(eq + 1))});
    }
    return out;
}

[[noreturn]] void rethrow_at(const Entry& e, const Error& err)
{
    throw Error(Errc::ParseError,
                "line " + std::to_string(e.line) + ", column " + std::to_string(e.column) + ": " + err.detail());
}

std::vector<std::string> split_tokens(const std::string& line)
{
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

std::size_t token_column(const std::string& line, std::size_t index)
{
    std::size_t pos = 0;
    for (std::size_t t = 0;; ++t) {
        pos = line.find_first_not_of(" \t\r", pos);
        if (pos == std::string::npos)
            return line.size() + 1;
        if (t == index)
            return pos + 1;
        pos = line.find_first_of(" \t\r", pos);
    }
}

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

const std::vector<std::string>& ExperimentConfig::keys()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : fields())
            v.emplace_back(f.name);
        return v;
    }();
    return names;
}

std::string ExperimentConfig::print() const
{
    std::string out;
    for (const auto& f : fields())
        out += std::string(f.name) + " = " + f.get(*this) + "\n";
    return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) { field_named(key).set(*this, value); }

ExperimentConfig ExperimentConfig::parse(const std::string& text)
{
    ExperimentConfig c;
    for (const auto& e : split_entries(text)) {
        try {
            c.set(e.key, e.value);
        } catch (const Error& err) {
            rethrow_at(e, err);
        }
    }
    return c;
}

std::string ExperimentConfig::hash() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(print())));
    return buf;
}

std::vector<ExperimentConfig> expand_matrix(const std::string& text)
{
    struct Axis {
        Entry entry;
        std::vector<std::string> values;
    };
    std::vector<Axis> axes;
    for (const auto& e : split_entries(text)) {
        Axis axis{e, {}};
        std::string rest = e.value;
        if (e.key == "seed" && rest.find("..") != std::string::npos) {
            const auto dots = rest.find("..");
            try {
                const auto lo = parse_number<std::uint64_t>(trim(rest.substr(0, dots)), "seed range");
                const auto hi = parse_number<std::uint64_t>(trim(rest.substr(dots + 2)), "seed range");
                for (std::uint64_t s = lo; s <= hi; ++s)
                    axis.values.push_back(std::to_string(s));
            } catch (const Error& err) {
                rethrow_at(e, err);
            }
        } else {
            std::size_t start = 0;
            while (true) {
                const auto bar = rest.find('|', start);
                axis.values.push_back(trim(rest.substr(start, bar - start)));
                if (bar == std::string::npos)
                    break;
                start = bar + 1;
            }
        }
        axes.push_back(std::move(axis));
    }
    std::vector<ExperimentConfig> out;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (const auto& a : axes)
        if (a.values.empty())
            return out;
    while (true) {
        ExperimentConfig c;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            try {
                c.set(axes[i].entry.key, axes[i].values[idx[i]]);
            } catch (const Error& err) {
                rethrow_at(axes[i].entry, err);
            }
        }
        out.push_back(std::move(c));
        std::size_t i = axes.size();
        while (i > 0) {
            --i;
            if (++idx[i] < axes[i].values.size())
                break;
            idx[i] = 0;
            if (i == 0)
                return out;
        }
        if (axes.empty())
            return out;
    }
}

std::string Instance::serialize() const
{
    std::ostringstream out;
    out << ctx.q() << ' ' << n << ' ' << fmt_double(eta) << ' ' << fmt_double(eta_bound) << ' ' << seed << '\n';
    if (target) {
        const auto c = target->coeffs();
        for (std::size_t i = 0; i < c.size(); ++i)
            out << (i ? " " : "") << c[i];
        out << '\n';
    }
    for (const auto& ex : examples) {
        for (Elem x : ex.a)
            out << x << ' ';
        out << ex.b << '\n';
    }
    return out.str();
}

Instance Instance::parse(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](std::size_t col, const std::string& msg) -> Error {
        return Error(Errc::ParseError,
                     "line " + std::to_string(lineno) + ", column " + std::to_string(col) + ": " + msg);
    };
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!trim(line).empty())
                return true;
        }
        return false;
    };
    if (!next_line()) {
        lineno = 1;
        throw fail(1, "empty instance");
    }
    Instance inst;
    auto head = split_tokens(line);
    if (head.size() != 5)
        throw fail(token_column(line, std::min<std::size_t>(head.size(), 5)),
                   "header needs 'q n eta eta_bound seed'");
    try {
        inst.ctx = FieldCtx(parse_number<std::int64_t>(head[0], "modulus"));
    } catch (const Error& e) {
        throw fail(token_column(line, 0), e.detail());
    }
    try {
        inst.n = parse_number<std::size_t>(head[1], "dimension");
        if (inst.n == 0)
            throw Error(Errc::ParseError, "dimension must be positive");
    } catch (const Error& e) {
        throw fail(token_column(line, 1), e.detail());
    }
    for (int t = 2; t <= 4; ++t) {
        try {
            if (t == 2)
                inst.eta = parse_number<double>(head[2], "eta");
            else if (t == 3)
                inst.eta_bound = parse_number<double>(head[3], "eta_bound");
            else
                inst.seed = parse_number<std::uint64_t>(head[4], "seed");
        } catch (const Error& e) {
            throw fail(token_column(line, static_cast<std::size_t>(t)), e.detail());
        }
    }
    const std::uint64_t q = inst.ctx.q();
    auto read_row = [&](const std::vector<std::string>& toks) {
        std::vector<Elem> row(toks.size());
        for (std::size_t i = 0; i < toks.size(); ++i) {
            try {
                row[i] = parse_number<Elem>(toks[i], "field element");
            } catch (const Error& e) {
                throw fail(token_column(line, i), e.detail());
            }
            if (row[i] >= q)
                throw fail(token_column(line, i), "value " + toks[i] + " outside [0, q)");
        }
        return row;
    };
    bool first = true;
    while (next_line()) {
        const auto toks = split_tokens(line);
        if (first && toks.size() == inst.n) {
            inst.target = LinearFn(inst.ctx, read_row(toks));
        } else if (toks.size() == inst.n + 1) {
            auto row = read_row(toks);
            const Elem b = row.back();
            row.pop_back();
            inst.examples.push_back({std::move(row), b});
        } else {
            throw fail(token_column(line, std::min(toks.size(), inst.n + 1)),
                       "expected " + std::to_string(inst.n + 1) + " values, found " + std::to_string(toks.size()));
        }
        first = false;
    }
    return inst;
}

std::uint64_t instance_stream_seed(std::uint64_t seed) { return derive_seed(seed, "instance/stream"); }

ExampleOracle Instance::oracle() const
{
    if (target)
        return ExampleOracle::simulated(*target, eta, eta_bound, instance_stream_seed(seed));
    if (!examples.empty())
        return ExampleOracle::from_pool(ctx, n, eta_bound, examples);
    throw Error(Errc::PreconditionFailed, "instance has neither a target nor examples");
}

Instance Instance::challenge() const
{
    Instance c = *this;
    c.target.reset();
    return c;
}

Instance generate_instance(const ExperimentConfig& config)
{
    Instance inst;
    inst.ctx = FieldCtx(config.q);
    inst.n = config.n;
    inst.eta = config.eta;
    inst.eta_bound = config.eta_bound;
    inst.seed = config.seed;
    Rng rng(derive_seed(config.seed, "instance/target"));
    inst.target = sample_sparse_linear(inst.ctx, config.n, config.d, rng);
    ExampleOracle stream = ExampleOracle::simulated(*inst.target, config.eta, config.eta_bound,
                                                    instance_stream_seed(config.seed));
    inst.examples.reserve(config.pool_size);
    for (std::size_t i = 0; i < config.pool_size; ++i)
        inst.examples.push_back(stream.next());
    return inst;
}

GammaSpec make_gamma(const ExperimentConfig& config) { return GammaSpec::parse(config.gamma); }

Approximator make_approximator(const ExperimentConfig& config, const FieldCtx& ctx, std::size_t n)
{
    const GammaSpec gamma = make_gamma(config);
    const std::string& name = config.approximator;
    std::optional<Approximator> A;
    if (name.rfind("cheat:", 0) == 0) {
        A = cheat_band_approximator(gamma, parse_cheat_mode(name.substr(6)));
    } else if (name == "brute") {
        const double delta = config.approx_delta > 0 ? config.approx_delta : default_inner_delta(ctx.q(), n);
        A = brute_force_approximator(ctx, n, config.eta_bound, delta);
    } else {
        throw Error(Errc::ParseError, "unknown approximator '" + name + "'");
    }
    return config.clamp ? clamp_to_delta(*A, gamma) : *A;
}

ReductionOptions make_reduction_options(const ExperimentConfig& config)
{
    ReductionOptions o;
    o.relevance = parse_relevance_method(config.relevance);
    o.coeff = parse_coeff_method(config.coeff);
    o.psi.fast_mode = config.fast_mode;
    o.distinguisher_trials = config.distinguisher_trials;
    return o;
}

PsiTable run_psi_table(const ExperimentConfig& config)
{
    const FieldCtx ctx(config.q);
    const Approximator A = make_approximator(config, ctx, config.n);
    PsiOptions opt;
    opt.fast_mode = config.fast_mode;
    return build_psi_table(A, make_gamma(config), ctx, config.n, config.eta_bound, reduction_table_h(config.n),
                           config.delta / 4.0, derive_seed(config.seed, "table"), opt);
}

RelevanceReport run_reduce(const ExperimentConfig& config, const Instance& instance)
{
    const GammaSpec gamma = make_gamma(config);
    const std::size_t n = instance.n;
    const Approximator A = make_approximator(config, instance.ctx, n);
    const ReductionOptions opt = make_reduction_options(config);
    const std::uint64_t seed = derive_seed(config.seed, config.trial_label);
    ExampleOracle oracle = instance.oracle();
    if (auto meter = LearnerBudget{config.delta, 0, config.max_examples, config.max_wall_ms}.meter())
        oracle.attach_budget(meter);
    const PsiTable table = build_psi_table(A, gamma, instance.ctx, n, instance.eta_bound, reduction_table_h(n),
                                           config.delta / 4.0, derive_seed(seed, "table"), opt.psi);
    const std::size_t m = config.m > 0 ? config.m : default_gap_start(gamma, n);
    const std::size_t k = find_gap_k(table, gamma, m, instance.ctx.is_binary());
    if (opt.relevance == RelevanceMethod::Psi)
        return classify_variables_psi(A, table, k, oracle, n, config.delta / 8.0, derive_seed(seed, "classify"),
                                      opt.psi);
    return identify_relevant_distinguisher(A, gamma, n, k, oracle, opt.distinguisher_trials, config.delta / 8.0,
                                           derive_seed(seed, "distinguisher"));
}

std::string LearnRecord::to_jsonl() const
{
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["coefficients"] = coefficients;
    j["examples_used"] = examples_used;
    j["wall_ms"] = wall_ms;
    if (success)
        j["success"] = *success;
    j["partial"] = partial;
    if (!error.empty())
        j["error"] = error;
    return j.dump() + "\n";
}

LearnRecord LearnRecord::from_json(const std::string& line)
{
    try {
        const auto j = nlohmann::json::parse(line);
        LearnRecord r;
        r.config_hash = j.at("config_hash").get<std::string>();
        r.coefficients = j.at("coefficients").get<std::vector<Elem>>();
        r.examples_used = j.at("examples_used").get<std::uint64_t>();
        r.wall_ms = j.at("wall_ms").get<double>();
        if (j.contains("success"))
            r.success = j.at("success").get<bool>();
        r.partial = j.value("partial", false);
        r.error = j.value("error", std::string());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad result record: ") + e.what());
    }
}

LearnRecord run_learn(const ExperimentConfig& config, const Instance& instance)
{
    const auto t0 = std::chrono::steady_clock::now();
    LearnRecord rec;
    rec.config_hash = config.hash();
    ExampleOracle oracle = instance.oracle();
    try {
        const FieldCtx& ctx = instance.ctx;
        const std::size_t n = instance.n;
        const GammaSpec gamma = make_gamma(config);
        const Approximator A = make_approximator(config, ctx, n);
        const ReductionOptions opt = make_reduction_options(config);
        const std::uint64_t seed = derive_seed(config.seed, config.trial_label);
        const LearnerBudget budget{config.delta, config.boost_reps, config.max_examples, config.max_wall_ms};
        if (auto meter = budget.meter())
            oracle.attach_budget(meter);

        SparseLearner learner;
        PsiTable table;
        if (config.pipeline == "sparse") {
            table = build_psi_table(A, gamma, ctx, n, instance.eta_bound, reduction_table_h(n), config.delta / 4.0,
                                    derive_seed(seed, "table"), opt.psi);
            const std::size_t m = config.m > 0 ? config.m : default_gap_start(gamma, n);
            learner = [&, m](ExampleOracle& s, std::uint64_t sd) {
                return learn_sparse_k(A, gamma, m, s, config.delta, sd, opt, &table).hypothesis;
            };
        } else if (config.pipeline == "full") {
            const std::size_t N = padded_dimension(gamma, n);
            table = build_psi_table(A, gamma, ctx, N, instance.eta_bound, reduction_table_h(N), config.delta / 4.0,
                                    derive_seed(seed, "full/table"), opt.psi);
            learner = [&](ExampleOracle& s, std::uint64_t sd) {
                const FullResult r = learn_parity_full(A, gamma, s, sd, FullOptions{opt, budget}, &table);
                rec.pool_jsonl = r.pool_jsonl();
                return r.best;
            };
        } else {
            throw Error(Errc::ParseError, "unknown pipeline '" + config.pipeline + "'");
        }

        LinearFn h(ctx, n);
        if (config.sweep)
            h = eta_sweep(learner, oracle, config.grid_steps, config.delta, derive_seed(seed, "sweep")).best;
        else
            h = learner(oracle, seed);
        rec.coefficients = h.coeffs();
        if (instance.target)
            rec.success = h == *instance.target;
    } catch (const Error& e) {
        rec.partial = e.code() == Errc::BudgetExceeded;
        rec.error = e.what();
        rec.coefficients.clear();
        if (instance.target)
            rec.success = false;
    }
    rec.examples_used = oracle.source_draws();
    rec.wall_ms = ms_since(t0);
    return rec;
}

bool verify(const LearnRecord& record, const Instance& instance)
{
    if (!instance.target)
        throw Error(Errc::PreconditionFailed, "instance carries no target to verify against");
    return !record.failed() && record.coefficients == instance.target->coeffs();
}

std::string bench_csv_row(const BenchRow& row)
{
    const auto& c = row.config;
    auto quote = [](const std::string& s) {
        return s.find_first_of(",\"") == std::string::npos ? s : "\"" + s + "\"";
    };
    std::string method = c.relevance + "/" + c.coeff;
    if (c.pipeline != "sparse")
        method += "/" + c.pipeline;
    if (c.sweep)
        method += "/sweep";
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", row.record.wall_ms);
    return std::to_string(c.q) + "," + std::to_string(c.n) + "," + std::to_string(c.d) + "," + quote(c.gamma) +
           "," + quote(c.approximator + (c.clamp ? "+clamp" : "")) + "," + quote(method) + "," +
           fmt_double(c.eta) + "," + fmt_double(c.eta_bound) + "," + std::to_string(c.seed) + "," +
           std::to_string(row.record.examples_used) + "," + wall + "," +
           (row.record.success.value_or(false) ? "1" : "0");
}

std::string run_bench(const std::vector<ExperimentConfig>& matrix, std::uint64_t max_total_ms,
                      const std::function<void(const BenchRow&)>& on_row)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::string csv = std::string(kBenchHeader) + "\n";
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        if (max_total_ms > 0 && ms_since(t0) > static_cast<double>(max_total_ms)) {
            csv += "# partial: stopped after " + std::to_string(i) + " of " + std::to_string(matrix.size()) +
                   " runs (wall-clock cap)\n";
            return csv;
        }
        BenchRow row{matrix[i], run_learn(matrix[i], generate_instance(matrix[i]))};
        csv += bench_csv_row(row) + "\n";
        if (on_row)
            on_row(row);
    }
    return csv;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Errc::IoError, "cannot write '" + tmp + "'");
        out << content;
        if (!out.flush())
            throw Error(Errc::IoError, "write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(Errc::IoError, "cannot move '" + tmp + "' into place: " + ec.message());
}

} // namespace parlearn
