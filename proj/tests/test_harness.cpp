#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parlearn/error.hpp"
#include "parlearn/harness.hpp"

using namespace parlearn;

namespace {

std::string message_of(auto&& fn, Errc expected)
{
    try {
        fn();
    } catch (const Error& e) {
        CHECK(e.code() == expected);
        return e.what();
    }
    FAIL("expected an Error");
    return {};
}

std::string fnv1a_ref(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> csv_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        out.push_back(f);
    return out;
}

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.n = 16;
    c.d = 3;
    c.m = 3;
    c.pool_size = 50;
    return c;
}

} // namespace

TEST_CASE("config print and parse round trip")
{
    const ExperimentConfig def;
    const std::string text = def.print();
    CHECK(ExperimentConfig::parse(text) == def);
    std::size_t lines = 0;
    for (char ch : text)
        lines += ch == '\n';
    CHECK(lines == ExperimentConfig::keys().size());
    CHECK(text.rfind("q = 2\n", 0) == 0);

    ExperimentConfig c;
    c.q = 5;
    c.gamma = "power:1.5";
    c.eta = 0.125;
    c.sweep = true;
    c.seed = 99;
    c.trial_label = "rerun";
    const ExperimentConfig back = ExperimentConfig::parse("# comment\n\n" + c.print() + "   \n");
    CHECK(back == c);
    CHECK(ExperimentConfig::parse("eta = 0.3 # trailing\n").eta == 0.3);
    CHECK(ExperimentConfig::parse("sweep = true\nclamp = 1\n").clamp);
}

TEST_CASE("config hash")
{
    CHECK(fnv1a_ref("a") == "af63dc4c8601ec8c");
    const ExperimentConfig def;
    CHECK(def.hash() == fnv1a_ref(def.print()));
    ExperimentConfig other = def;
    other.seed = 2;
    CHECK(other.hash() != def.hash());
    CHECK(other.hash().size() == 16);
}

TEST_CASE("config parse errors carry line and column")
{
    const std::string bad_value = message_of([] { ExperimentConfig::parse("q = 2\nn = abc\n"); }, Errc::ParseError);
    CHECK(bad_value.find("line 2, column 5") != std::string::npos);
    const std::string no_eq = message_of([] { ExperimentConfig::parse("q = 2\n\n  bogus\n"); }, Errc::ParseError);
    CHECK(no_eq.find("line 3, column 3") != std::string::npos);
    const std::string unknown = message_of([] { ExperimentConfig::parse("colour = red\n"); }, Errc::ParseError);
    CHECK(unknown.find("line 1") != std::string::npos);
    CHECK(unknown.find("colour") != std::string::npos);
    CHECK(unknown.find("ParseError: ParseError") == std::string::npos);
    message_of([] { ExperimentConfig::parse("sweep = maybe\n"); }, Errc::ParseError);
    message_of([] { ExperimentConfig().set("eta", "0.1x"); }, Errc::ParseError);
}

TEST_CASE("matrix expansion")
{
    const auto m = expand_matrix("q = 2 | 3\nseed = 1..3\n");
    REQUIRE(m.size() == 6);
    CHECK(m[0].q == 2);
    CHECK(m[0].seed == 1);
    CHECK(m[1].seed == 2);
    CHECK(m[3].q == 3);
    CHECK(m[3].seed == 1);
    CHECK(m[5].seed == 3);
    CHECK(expand_matrix("").size() == 1);
    CHECK(expand_matrix("seed = 5..4\n").empty());
    const std::string err = message_of([] { expand_matrix("n = 4\nq = 2 | x\n"); }, Errc::ParseError);
    CHECK(err.find("line 2") != std::string::npos);
}

TEST_CASE("instance generation is deterministic and round-trips")
{
    ExperimentConfig c = small_config();
    c.q = 3;
    const Instance a = generate_instance(c);
    const Instance b = generate_instance(c);
    CHECK(a.serialize() == b.serialize());
    REQUIRE(a.target.has_value());
    CHECK(a.target->sparsity() == 3);
    CHECK(a.examples.size() == 50);
    const Instance back = Instance::parse(a.serialize());
    CHECK(back.serialize() == a.serialize());
    CHECK(*back.target == *a.target);

    c.seed = 2;
    CHECK(generate_instance(c).serialize() != a.serialize());

    // the pool is a prefix of the stream the open instance describes
    ExampleOracle o = a.oracle();
    for (const auto& ex : a.examples) {
        const LabeledExample got = o.next();
        REQUIRE(got.a == ex.a);
        REQUIRE(got.b == ex.b);
    }

    const Instance ch = a.challenge();
    CHECK_FALSE(ch.target.has_value());
    const std::string text = ch.serialize();
    std::istringstream lines(text);
    std::string l1, l2;
    std::getline(lines, l1);
    std::getline(lines, l2);
    CHECK(csv_fields(l2).size() == 1);
    std::size_t tokens = 0;
    std::istringstream toks(l2);
    for (std::string t; toks >> t;)
        ++tokens;
    CHECK(tokens == 17);
    CHECK_FALSE(Instance::parse(text).target.has_value());
}

TEST_CASE("instance parse errors")
{
    CHECK(message_of([] { Instance::parse(""); }, Errc::ParseError).find("line 1") != std::string::npos);
    CHECK(message_of([] { Instance::parse("2 6 0.1 0.1\n"); }, Errc::ParseError).find("line 1") !=
          std::string::npos);
    CHECK(message_of([] { Instance::parse("4 3 0.1 0.1 1\n"); }, Errc::ParseError).find("column 1") !=
          std::string::npos);
    CHECK(message_of([] { Instance::parse("2 3 0.1 0.1 1\n1 0 2 1\n"); }, Errc::ParseError)
              .find("line 2, column 5") != std::string::npos);
    CHECK(message_of([] { Instance::parse("2 3 0.1 0.1 1\n1 0 1\n1 0\n"); }, Errc::ParseError).find("line 3") !=
          std::string::npos);
    CHECK(message_of([] { Instance::parse("2 3 0.1 0.1 1\n\n1 0 z 1\n"); }, Errc::ParseError)
              .find("line 3, column 5") != std::string::npos);
}

TEST_CASE("learn and verify")
{
    const ExperimentConfig c = small_config();
    const Instance inst = generate_instance(c);
    const LearnRecord r = run_learn(c, inst);
    CHECK(r.error.empty());
    CHECK_FALSE(r.partial);
    REQUIRE(r.success.has_value());
    CHECK(*r.success);
    CHECK(verify(r, inst));
    CHECK(r.config_hash == c.hash());
    CHECK(r.examples_used > 0);

    ExperimentConfig other = c;
    other.seed = 7;
    CHECK_FALSE(verify(r, generate_instance(other)));

    // the cheat needs the planted target, which a challenge instance withholds
    const Instance ch = inst.challenge();
    const LearnRecord cheat = run_learn(c, ch);
    CHECK_FALSE(cheat.success.has_value());
    CHECK(cheat.failed());

    ExperimentConfig bc = c;
    bc.approximator = "brute";
    bc.n = 10;
    bc.d = 2;
    bc.m = 2;
    bc.pool_size = 20000;
    const Instance open = generate_instance(bc);
    const Instance sealed = open.challenge();
    const LearnRecord rc = run_learn(bc, sealed);
    CHECK_FALSE(rc.success.has_value());
    CHECK(rc.error.empty());
    CHECK(verify(rc, open));
    message_of([&] { verify(rc, sealed); }, Errc::PreconditionFailed);

    const LearnRecord back = LearnRecord::from_json(r.to_jsonl());
    CHECK(back.coefficients == r.coefficients);
    CHECK(back.success == r.success);
    CHECK(back.examples_used == r.examples_used);
    message_of([] { LearnRecord::from_json("{not json"); }, Errc::ParseError);
}

TEST_CASE("learn records failures and budget exhaustion")
{
    ExperimentConfig c = small_config();
    c.max_examples = 5;
    const LearnRecord r = run_learn(c, generate_instance(c));
    CHECK(r.partial);
    CHECK(r.failed());

    ExperimentConfig wrong = small_config();
    wrong.m = 1;
    const LearnRecord w = run_learn(wrong, generate_instance(wrong));
    CHECK_FALSE(w.error.empty());
    CHECK(w.failed());
}

TEST_CASE("psi table and reduce runners")
{
    const ExperimentConfig c = small_config();
    const PsiTable t = run_psi_table(c);
    CHECK(t.n == 16);
    CHECK(t.values.size() == 16);
    CHECK(t.at(5) == 5);
    const Instance inst = generate_instance(c);
    const RelevanceReport r = run_reduce(c, inst);
    CHECK(r.relevant() == inst.target->support());
    CHECK(r.k == 3);
}

TEST_CASE("factories")
{
    ExperimentConfig c;
    c.approximator = "brute";
    c.n = 8;
    CHECK(make_approximator(c, FieldCtx(2), 8).traits().descriptor == "brute");
    c.clamp = true;
    CHECK(make_approximator(c, FieldCtx(2), 8).traits().descriptor.rfind("clamp(", 0) == 0);
    c.approximator = "oracle";
    message_of([&] { make_approximator(c, FieldCtx(2), 8); }, Errc::ParseError);
    c.relevance = "distinguisher";
    c.coeff = "psi-coeff";
    const ReductionOptions o = make_reduction_options(c);
    CHECK(o.relevance == RelevanceMethod::Distinguisher);
    CHECK(o.coeff == CoeffMethod::Psi);
    c.gamma = "power:1.5";
    CHECK(make_gamma(c).eval(4) == doctest::Approx(8));
}

TEST_CASE("bench csv")
{
    CHECK(run_bench({}) == std::string(kBenchHeader) + "\n");
    auto matrix = expand_matrix("n = 16\nd = 3\nm = 3\npool_size = 10\nseed = 1..3\ncoeff = gauss-coeff|psi-coeff\n");
    REQUIRE(matrix.size() == 6);
    std::size_t rows_seen = 0;
    const std::string a = run_bench(matrix, 0, [&](const BenchRow&) { ++rows_seen; });
    const std::string b = run_bench(matrix);
    CHECK(rows_seen == 6);
    std::istringstream la(a), lb(b);
    std::string x, y;
    std::getline(la, x);
    CHECK(x == kBenchHeader);
    std::getline(lb, y);
    std::size_t rows = 0;
    while (std::getline(la, x) && std::getline(lb, y)) {
        auto fa = csv_fields(x), fb = csv_fields(y);
        REQUIRE(fa.size() == 12);
        CHECK(fa[11] == "1");
        fa[10] = fb[10] = "";
        CHECK(fa == fb);
        ++rows;
    }
    CHECK(rows == 6);
    CHECK(csv_fields(a.substr(a.find('\n') + 1))[5] == "psi/gauss-coeff");
}

TEST_CASE("file helpers")
{
    const auto dir = std::filesystem::temp_directory_path() / "parlearn_test_harness";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "x.txt").string();
    write_file_atomic(path, "hello\n");
    CHECK(read_file(path) == "hello\n");
    write_file_atomic(path, "again");
    CHECK(read_file(path) == "again");
    message_of([&] { read_file((dir / "missing.txt").string()); }, Errc::IoError);
    std::filesystem::remove_all(dir);
}
