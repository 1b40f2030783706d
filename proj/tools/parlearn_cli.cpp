// parlearn: generate noisy sparse-linear instances, build Psi tables, run
// the reductions, verify results, and benchmark config matrices.

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "parlearn/error.hpp"
#include "parlearn/harness.hpp"

using namespace parlearn;

namespace {

enum Exit : int { kOk = 0, kMismatch = 1, kUsage = 2, kBudget = 3 };

int exit_code_for(Errc code)
{
    switch (code) {
    case Errc::BudgetExceeded: return kBudget;
    case Errc::ParseError:
    case Errc::IoError:
    case Errc::NotPrime:
    case Errc::TooLarge:
    case Errc::BadRates:
    case Errc::BadSparsity:
        return kUsage;
    default: return kMismatch;
    }
}

void emit(const std::string& path, const std::string& content)
{
    if (path.empty() || path == "-")
        std::cout << content << std::flush;
    else
        write_file_atomic(path, content);
}

struct Common {
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config_path, "Config file of 'key = value' lines")->check(CLI::ExistingFile);
        for (const auto& key : ExperimentConfig::keys()) {
            std::string dashed = key;
            for (auto& ch : dashed)
                if (ch == '_')
                    ch = '-';
            std::string names = "--" + key;
            if (dashed != key)
                names += ",--" + dashed;
            app->add_option_function<std::string>(
                names, [this, key](const std::string& v) { overrides[key] = v; }, "Override config key " + key);
        }
    }

    ExperimentConfig load() const
    {
        ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::parse(read_file(config_path));
        for (const auto& [k, v] : overrides) {
            try {
                c.set(k, v);
            } catch (const Error& e) {
                throw Error(Errc::ParseError, "--" + k + ": " + e.detail());
            }
        }
        return c;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse noisy linear learning via sparsity approximators"};
    app.require_subcommand(1);

    Common gen_c, table_c, reduce_c, learn_c;

    auto* gen = app.add_subcommand("gen", "Write an instance with a planted target");
    gen_c.attach(gen);
    std::string gen_out, gen_sealed;
    gen->add_option("--out", gen_out, "Instance file")->required();
    gen->add_option("--sealed", gen_sealed,
                    "Also write the open copy here and make --out a challenge file without the target line");

    auto* table = app.add_subcommand("psi-table", "Build a Psi table and write it as JSON");
    table_c.attach(table);
    std::string table_out = "-";
    table->add_option("--out", table_out, "Output file ('-' for stdout)");

    auto* reduce = app.add_subcommand("reduce", "Classify the variables of an instance");
    reduce_c.attach(reduce);
    std::string reduce_inst, reduce_out = "-";
    reduce->add_option("--instance", reduce_inst, "Instance file")->required()->check(CLI::ExistingFile);
    reduce->add_option("--out", reduce_out, "Output file ('-' for stdout)");

    auto* learn = app.add_subcommand("learn", "Learn the target of an instance and emit a JSONL record");
    learn_c.attach(learn);
    std::string learn_inst, learn_out = "-", learn_pool;
    learn->add_option("--instance", learn_inst, "Instance file")->required()->check(CLI::ExistingFile);
    learn->add_option("--out", learn_out, "Record file ('-' for stdout)");
    learn->add_option("--pool-out", learn_pool, "Hypothesis pool dump (full pipeline)");

    auto* ver = app.add_subcommand("verify", "Compare learned coefficients with a planted target");
    std::string ver_result, ver_inst;
    ver->add_option("--result", ver_result, "JSONL record file")->required()->check(CLI::ExistingFile);
    ver->add_option("--instance", ver_inst, "Open instance file")->required()->check(CLI::ExistingFile);

    auto* bench = app.add_subcommand("bench", "Run a config matrix and write CSV");
    std::string bench_matrix, bench_out = "-";
    std::uint64_t bench_cap = 0;
    bench->add_option("--matrix", bench_matrix, "Matrix file ('key = a | b', 'seed = 1..20')")
        ->required()
        ->check(CLI::ExistingFile);
    bench->add_option("--out", bench_out, "CSV file ('-' for stdout)");
    bench->add_option("--max-total-ms", bench_cap, "Stop starting runs after this much wall time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) {
            const ExperimentConfig c = gen_c.load();
            const Instance inst = generate_instance(c);
            if (gen_sealed.empty()) {
                write_file_atomic(gen_out, inst.serialize());
            } else {
                write_file_atomic(gen_out, inst.challenge().serialize());
                write_file_atomic(gen_sealed, inst.serialize());
            }
            return kOk;
        }
        if (*table) {
            emit(table_out, run_psi_table(table_c.load()).to_json());
            return kOk;
        }
        if (*reduce) {
            const RelevanceReport rep = run_reduce(reduce_c.load(), Instance::parse(read_file(reduce_inst)));
            emit(reduce_out, rep.to_json());
            return rep.undecided() == 0 ? kOk : kMismatch;
        }
        if (*learn) {
            const LearnRecord rec = run_learn(learn_c.load(), Instance::parse(read_file(learn_inst)));
            emit(learn_out, rec.to_jsonl());
            if (!learn_pool.empty())
                write_file_atomic(learn_pool, rec.pool_jsonl);
            if (rec.partial) {
                std::cerr << "parlearn: " << rec.error << "\n";
                return kBudget;
            }
            if (!rec.error.empty()) {
                std::cerr << "parlearn: " << rec.error << "\n";
                return kMismatch;
            }
            return rec.success.value_or(true) ? kOk : kMismatch;
        }
        if (*ver) {
            const Instance inst = Instance::parse(read_file(ver_inst));
            if (!inst.target)
                throw Error(Errc::ParseError, "'" + ver_inst + "' has no coefficient line to verify against");
            std::istringstream lines(read_file(ver_result));
            std::string line;
            std::size_t records = 0, matched = 0;
            while (std::getline(lines, line)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos)
                    continue;
                ++records;
                matched += verify(LearnRecord::from_json(line), inst);
            }
            if (records == 0)
                throw Error(Errc::ParseError, "no records in '" + ver_result + "'");
            std::cout << matched << "/" << records << " records match\n";
            return matched == records ? kOk : kMismatch;
        }
        if (*bench) {
            const auto matrix = expand_matrix(read_file(bench_matrix));
            const std::string csv = run_bench(matrix, bench_cap);
            emit(bench_out, csv);
            return csv.find("\n# partial") == std::string::npos ? kOk : kBudget;
        }
    } catch (const Error& e) {
        std::cerr << "parlearn: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
    return kUsage;
}
