#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parlearn/approximator.hpp"
#include "parlearn/field.hpp"
#include "parlearn/full_learner.hpp"
#include "parlearn/gamma.hpp"
#include "parlearn/linear_fn.hpp"
#include "parlearn/oracle.hpp"
#include "parlearn/psi.hpp"
#include "parlearn/sparse_reduction.hpp"

namespace parlearn {

/// Everything a run depends on. Text form is one "key = value" per line;
/// blank lines and '#' comments are ignored.
struct ExperimentConfig {
    std::int64_t q = 2;
    std::size_t n = 16;
    std::size_t d = 3;
    std::string gamma = "affine:2";
    /// cheat:exact | cheat:midpoint | cheat:uniform | cheat:low | cheat:high | brute
    std::string approximator = "cheat:exact";
    /// Wrap the approximator in clamp_to_delta.
    bool clamp = false;
    /// Failure bound per brute-force call; 0 means 1/(q n^7).
    double approx_delta = 0;
    double eta = 0.1;
    double eta_bound = 0.1;
    bool sweep = false;
    std::size_t grid_steps = 0;
    /// sparse | full
    std::string pipeline = "sparse";
    std::string relevance = "psi";
    std::string coeff = "gauss-coeff";
    bool fast_mode = true;
    /// Gap search start; 0 picks the default.
    std::size_t m = 0;
    std::size_t distinguisher_trials = 25;
    double delta = 0.1;
    std::size_t boost_reps = 0;
    std::uint64_t max_examples = 0;
    std::uint64_t max_wall_ms = 0;
    std::uint64_t seed = 1;
    std::string trial_label = "trial";
    /// Pre-drawn examples written into generated instances.
    std::size_t pool_size = 20000;

    /// Canonical text: every key, fixed order.
    std::string print() const;
    /// Throws ParseError with line:column on bad input.
    static ExperimentConfig parse(const std::string& text);
    /// Applies one key/value; throws ParseError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// FNV-1a of print(), as 16 hex digits.
    std::string hash() const;
    static const std::vector<std::string>& keys();

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Matrix file: like a config, but a value may list alternatives separated by
/// '|' and seed may be a range "a..b". Expansion varies later keys fastest,
/// in file order.
std::vector<ExperimentConfig> expand_matrix(const std::string& text);

/// Line 1 "q n eta eta_bound seed"; line 2 the target coefficients (open
/// instances only); then "a_1 ... a_n b" per pre-drawn example.
struct Instance {
    FieldCtx ctx{2};
    std::size_t n = 1;
    double eta = 0;
    double eta_bound = 0;
    std::uint64_t seed = 0;
    std::optional<LinearFn> target;
    std::vector<LabeledExample> examples;

    std::string serialize() const;
    /// Throws ParseError naming line and column.
    static Instance parse(const std::string& text);

    /// The pre-drawn pool when present, else the simulated stream of the target.
    ExampleOracle oracle() const;
    /// Same instance without the coefficient line.
    Instance challenge() const;
};

/// Seed of the example stream an instance with this seed describes.
std::uint64_t instance_stream_seed(std::uint64_t seed);

/// Planted target with sparsity config.d; pool_size examples of its stream.
Instance generate_instance(const ExperimentConfig& config);

Approximator make_approximator(const ExperimentConfig& config, const FieldCtx& ctx, std::size_t n);
GammaSpec make_gamma(const ExperimentConfig& config);
ReductionOptions make_reduction_options(const ExperimentConfig& config);

PsiTable run_psi_table(const ExperimentConfig& config);

/// Table, gap k and relevance report for the instance's stream.
RelevanceReport run_reduce(const ExperimentConfig& config, const Instance& instance);

struct LearnRecord {
    std::string config_hash;
    std::vector<Elem> coefficients;
    std::uint64_t examples_used = 0;
    double wall_ms = 0;
    std::optional<bool> success;
    bool partial = false;
    std::string error;
    std::string pool_jsonl;

    bool failed() const { return partial || !error.empty(); }
    std::string to_jsonl() const;
    static LearnRecord from_json(const std::string& line);
};

/// Runs the configured pipeline on the instance. Library failures are
/// captured in the record; budget exhaustion sets partial.
LearnRecord run_learn(const ExperimentConfig& config, const Instance& instance);

/// True iff the record's coefficients equal the instance's target. Throws
/// PreconditionFailed when the instance carries no target.
bool verify(const LearnRecord& record, const Instance& instance);

struct BenchRow {
    ExperimentConfig config;
    LearnRecord record;
};

inline constexpr const char* kBenchHeader =
    "q,n,d,gamma,approximator,method,eta,eta_bound,seed,examples_used,wall_ms,success";

std::string bench_csv_row(const BenchRow& row);

/// One generate + learn per config, in order. Stops early once total wall
/// time passes max_total_ms (0 = unlimited) and marks the CSV partial.
std::string run_bench(const std::vector<ExperimentConfig>& matrix, std::uint64_t max_total_ms = 0,
                      const std::function<void(const BenchRow&)>& on_row = {});

std::string read_file(const std::string& path);
/// Writes through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace parlearn
