#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "dlab/data/corruption.hpp"
#include "dlab/data/dataset.hpp"
#include "dlab/data/generator.hpp"
#include "dlab/data/jsonl.hpp"
#include "dlab/data/overlap.hpp"
#include "dlab/data/text.hpp"
#include "dlab/errors.hpp"
#include "oracles/oracles.hpp"

using namespace dlab;
using namespace dlab::data;

namespace {

TaskSpec small_spec(std::uint64_t knowledge_seed = 5) {
    TaskSpec s;
    s.concept_count = 40;
    s.knowledge_seed = knowledge_seed;
    return s;
}

std::set<std::string> concept_tokens(const Dataset& ds) {
    std::set<std::string> out;
    for (const auto& item : ds.items) out.insert(item.meta.at("concept"));
    return out;
}

Dataset handmade(const std::vector<std::string>& questions, Role role = Role::IntermediateTrain) {
    Dataset ds;
    ds.role = role;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        ds.items.push_back({"q" + std::to_string(i), questions[i], {"a", "b", "c", "d"}, i % 4, {}});
    }
    return ds;
}

} // namespace

TEST_CASE("tokenizer lowercases, splits on whitespace and breaks long tokens into characters") {
    CHECK(tokenize("What  is\tX?") == std::vector<std::string>{"what", "is", "x?"});
    CHECK(tokenize("") .empty());
    CHECK(tokenize("abcdefghi") == std::vector<std::string>{"abcdefghi"});
    const auto split = tokenize("abcdefghij");
    CHECK(split.size() == 10);
    CHECK(split.front() == "a");
}

TEST_CASE("content hash is FNV-1a over the joined fields") {
    MCQItem item{"x", "what is it", {"a", "b", "c", "d"}, 0, {}};
    CHECK(content_hash(item) == oracle::fnv1a("what is it|a|b|c|d"));
}

TEST_CASE("task spec validation") {
    TaskSpec s;
    s.attributes_per_concept = 3;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = TaskSpec{};
    s.concept_count = 3;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    AlignmentSpec a;
    a.rho = 1.5;
    CHECK_THROWS_AS(a.validate(), ConfigError);
}

TEST_CASE("benchmark items carry exactly one mapped correct attribute") {
    const auto spec = small_spec();
    const auto knowledge = spec.knowledge_map();
    const auto ds = gen_benchmark(spec, 300, 9);
    CHECK(ds.role == Role::BenchmarkTest);
    CHECK(ds.size() == 300);
    for (const auto& item : ds.items) {
        REQUIRE(item.choices.size() == 4);
        const auto concept_name = item.meta.at("concept");
        const auto index = std::stoul(concept_name.substr(1));
        const auto correct = attribute_token(true, index, knowledge[index]);
        CHECK(std::count(item.choices.begin(), item.choices.end(), correct) == 1);
        CHECK(item.choices[item.answer] == correct);
        std::set<std::string> distinct(item.choices.begin(), item.choices.end());
        CHECK(distinct.size() == 4);
    }
}

TEST_CASE("size 1 benchmark") {
    const auto spec = small_spec();
    const auto ds = gen_benchmark(spec, 1, 1);
    REQUIRE(ds.size() == 1);
    const auto index = std::stoul(ds.items[0].meta.at("concept").substr(1));
    CHECK(ds.items[0].choices[ds.items[0].answer] == attribute_token(true, index, spec.knowledge_map()[index]));
    CHECK_THROWS_AS(gen_benchmark(spec, 0, 1), ContractError);
}

TEST_CASE("generation is deterministic") {
    const auto spec = small_spec();
    CHECK(gen_benchmark(spec, 50, 3) == gen_benchmark(spec, 50, 3));
    const auto bench = gen_benchmark(spec, 50, 3);
    CHECK(gen_intermediate(spec, {}, 80, 4, bench) == gen_intermediate(spec, {}, 80, 4, bench));
    std::ostringstream a, b;
    write_jsonl(gen_benchmark(spec, 50, 3), a);
    write_jsonl(gen_benchmark(spec, 50, 3), b);
    CHECK(a.str() == b.str());
}

TEST_CASE("answer positions are uniform") {
    const auto ds = gen_benchmark(small_spec(), 4000, 21);
    std::vector<int> counts(4, 0);
    for (const auto& item : ds.items) ++counts[item.answer];
    for (int c : counts) CHECK(std::abs(c / 4000.0 - 0.25) <= 0.03);
}

TEST_CASE("rho endpoints control concept overlap") {
    const auto spec = small_spec();
    const auto bench = gen_benchmark(spec, 100, 2);
    const auto bench_concepts = concept_tokens(bench);

    AlignmentSpec disjoint{0.0, 0.5};
    const auto far = gen_intermediate(spec, disjoint, 200, 3, bench);
    for (const auto& c : concept_tokens(far)) CHECK(c.front() == 'd');
    // Benchmark tokens (concepts and attributes) never appear in a rho = 0 set.
    std::set<std::string> bench_tokens, far_tokens;
    for (const auto& item : bench.items) {
        for (const auto& t : tokenize(item.question)) if (t.front() == 'c' && t.size() > 1 && std::isdigit(t[1])) bench_tokens.insert(t);
    }
    for (const auto& item : far.items) {
        for (const auto& t : tokenize(item.question)) far_tokens.insert(t);
        for (const auto& c : item.choices) far_tokens.insert(c);
    }
    for (const auto& t : bench_tokens) CHECK(far_tokens.count(t) == 0);

    AlignmentSpec full{1.0, 0.5};
    const auto near = gen_intermediate(spec, full, 200, 3, bench);
    for (const auto& c : concept_tokens(near)) CHECK(c.front() == 'c');
}

TEST_CASE("shared concept count is non-decreasing in rho") {
    const auto spec = small_spec();
    const auto bench = gen_benchmark(spec, 100, 2);
    std::size_t previous = 0;
    for (double rho : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        std::size_t shared = 0;
        for (const auto& c : concept_tokens(gen_intermediate(spec, {rho, 0.5}, 300, 8, bench))) shared += c.front() == 'c';
        CHECK(shared >= previous);
        previous = shared;
    }
}

TEST_CASE("intermediate never repeats benchmark content") {
    TaskSpec tiny;
    tiny.concept_count = 4;
    tiny.template_count = 1;
    tiny.question_noise_len = 1;
    tiny.noise_token_pool = 2;
    tiny.context_attributes = 0;
    tiny.knowledge_seed = 1;
    const auto bench = gen_benchmark(tiny, 50, 1);
    std::set<std::uint64_t> hashes;
    for (const auto& item : bench.items) hashes.insert(content_hash(item));
    for (double rho : {0.0, 0.5, 1.0}) {
        const auto inter = gen_intermediate(tiny, {rho, 1.0}, 200, 2, bench);
        for (const auto& item : inter.items) CHECK(hashes.count(content_hash(item)) == 0);
    }
}

TEST_CASE("exhausted rejection sampling is a generation error") {
    TaskSpec tiny;
    tiny.concept_count = 4;
    tiny.attributes_per_concept = 4;
    tiny.template_count = 1;
    tiny.question_noise_len = 0;
    tiny.context_attributes = 0;
    tiny.knowledge_seed = 1;
    // The benchmark enumerates essentially every possible item.
    const auto bench = gen_benchmark(tiny, 20000, 1);
    CHECK_THROWS_AS(gen_intermediate(tiny, {1.0, 1.0}, 50, 2, bench), GenerationError);
}

TEST_CASE("intermediate labels follow an independent map") {
    const auto spec = small_spec();
    const auto knowledge = spec.knowledge_map();
    const auto bench = gen_benchmark(spec, 50, 2);
    const auto inter = gen_intermediate(spec, {1.0, 0.5}, 2000, 3, bench);
    std::size_t agree = 0;
    for (const auto& item : inter.items) {
        const auto index = std::stoul(item.meta.at("concept").substr(1));
        agree += item.choices[item.answer] == attribute_token(true, index, knowledge[index]);
    }
    // Agreement with the benchmark map sits near chance, far from 1.
    CHECK(static_cast<double>(agree) / 2000.0 < 0.6);
}

TEST_CASE("manifest replays the dataset") {
    const auto spec = small_spec();
    const auto bench = gen_benchmark(spec, 30, 2);
    CHECK(replay(bench.manifest) == bench);
    const auto inter = gen_intermediate(spec, {0.6, 0.25}, 40, 5, bench);
    CHECK(replay(inter.manifest) == inter);
    const auto corrupted = corrupt(inter, CorruptionMode::random_choices(), 77);
    CHECK(replay(corrupted.manifest) == corrupted);
}

TEST_CASE("corruption modes") {
    const auto spec = small_spec();
    const auto inter = gen_intermediate(spec, {}, 30, 5);

    const auto ic = corrupt(inter, CorruptionMode::identical_choices(), 1);
    for (std::size_t i = 0; i < ic.size(); ++i) {
        CHECK(ic.items[i].question == inter.items[i].question);
        CHECK(ic.items[i].answer == inter.items[i].answer);
        for (const auto& c : ic.items[i].choices) CHECK(c == "aaaaaaaaaa");
    }
    CHECK(ic.manifest.corruptions.size() == 1);

    const auto rqc = corrupt(inter, CorruptionMode::random_questions_and_choices(), 1);
    for (std::size_t i = 0; i < rqc.size(); ++i) {
        CHECK(rqc.items[i].question.size() == 50);
        CHECK(rqc.items[i].answer == inter.items[i].answer);
        CHECK(rqc.items[i].choices.size() == 4);
        for (const auto& c : rqc.items[i].choices) {
            CHECK(c.size() == 10);
            CHECK(std::all_of(c.begin(), c.end(), [](char ch) { return ch >= 'a' && ch <= 'z'; }));
        }
    }

    const auto rc = corrupt(inter, CorruptionMode::random_choices(), 1);
    CHECK(rc.items[0].question == inter.items[0].question);
    CHECK(rc == corrupt(inter, CorruptionMode::random_choices(), 1));
    CHECK(rc != corrupt(inter, CorruptionMode::random_choices(), 2));

    const auto iqc = corrupt(inter, CorruptionMode::identical_questions_and_choices('z'), 1);
    CHECK(iqc.items[3].question == std::string(50, 'z'));

    CHECK_THROWS_AS(corrupt(Dataset{}, CorruptionMode::random_choices(), 1), ContractError);
    CHECK_THROWS_AS(corrupt(inter, CorruptionMode::random_choices(0), 1), ConfigError);
}

TEST_CASE("identical corruption is idempotent on items") {
    const auto inter = gen_intermediate(small_spec(), {}, 20, 5);
    for (const auto& mode : {CorruptionMode::identical_choices(), CorruptionMode::identical_questions_and_choices()}) {
        const auto once = corrupt(inter, mode, 3);
        const auto twice = corrupt(once, mode, 4);
        CHECK(once.items == twice.items);
    }
}

TEST_CASE("corruption names round trip") {
    for (auto kind : {CorruptionMode::Kind::RandomChoices, CorruptionMode::Kind::IdenticalChoices,
                      CorruptionMode::Kind::RandomQuestionsAndChoices, CorruptionMode::Kind::IdenticalQuestionsAndChoices}) {
        CHECK(corruption_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(corruption_kind_from_string("shuffle"), ConfigError);
}

TEST_CASE("vocab overlap") {
    const auto a = handmade({"the cat sat", "a dog ran", "blue sky"});
    const auto b = handmade({"the cat ran", "green tree", "a dog ran fast"});
    std::vector<std::set<std::string>> sa, sb;
    for (const auto& i : a.items) {
        const auto t = tokenize(i.question);
        sa.emplace_back(t.begin(), t.end());
    }
    for (const auto& i : b.items) {
        const auto t = tokenize(i.question);
        sb.emplace_back(t.begin(), t.end());
    }
    for (double tau : {0.1, 0.5, 0.75, 1.0}) {
        CHECK(vocab_overlap(a, b, tau) == oracle::jaccard_pairs(sa, sb, tau));
        CHECK(vocab_overlap(a, b, tau) == vocab_overlap(b, a, tau));
    }
    // Hand count at 0.5: {the cat sat}~{the cat ran} = 2/4, {a dog ran}~{a dog ran fast} = 3/4.
    CHECK(vocab_overlap(a, b, 0.5) == 2);
    CHECK(vocab_overlap(a, a, 1.0) >= a.size());
    CHECK(vocab_overlap(a, handmade({"x y", "z"}), 0.01) == 0);
    CHECK_THROWS_AS(vocab_overlap(a, b, 0.0), ContractError);
    CHECK_THROWS_AS(vocab_overlap(a, Dataset{}, 0.5), ContractError);
}

TEST_CASE("overlap is symmetric on generated data") {
    const auto spec = small_spec();
    const auto bench = gen_benchmark(spec, 60, 1);
    const auto inter = gen_intermediate(spec, {}, 80, 2, bench);
    CHECK(vocab_overlap(bench, inter, 0.3) == vocab_overlap(inter, bench, 0.3));
}

TEST_CASE("jsonl round trip") {
    const auto spec = small_spec();
    const auto bench = gen_benchmark(spec, 25, 1);
    auto inter = corrupt(gen_intermediate(spec, {0.3, 0.5}, 25, 2, bench), CorruptionMode::identical_choices('q', 7), 9);
    for (const Dataset* ds : std::initializer_list<const Dataset*>{&bench, &inter}) {
        std::stringstream buf;
        write_jsonl(*ds, buf);
        CHECK(read_jsonl(buf) == *ds);
    }

    Dataset empty;
    empty.role = Role::BenchmarkTest;
    std::stringstream buf;
    write_jsonl(empty, buf);
    const auto back = read_jsonl(buf);
    CHECK(back.empty());
    CHECK(back.role == Role::BenchmarkTest);
}

TEST_CASE("jsonl errors") {
    SUBCASE("missing header") {
        std::istringstream in(R"({"id":"x","question":"q","choices":["a","b","c","d"],"answer":0,"meta":{}})" "\n");
        CHECK_THROWS_AS(read_jsonl(in), FormatError);
    }
    SUBCASE("empty file") {
        std::istringstream in("");
        CHECK_THROWS_AS(read_jsonl(in), FormatError);
    }
    SUBCASE("malformed line reports its number") {
        std::stringstream buf;
        write_jsonl(handmade({"q one"}), buf);
        std::string text = buf.str() + "{not json\n";
        std::istringstream in(text);
        try {
            read_jsonl(in);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("answer out of range names the item") {
        std::stringstream buf;
        write_jsonl(Dataset{{}, Role::BenchmarkTest, {}}, buf);
        std::string text = buf.str() + R"({"id":"item-7","question":"q","choices":["a","b","c","d"],"answer":7,"meta":{}})" "\n";
        std::istringstream in(text);
        try {
            read_jsonl(in);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("item-7") != std::string::npos);
        }
    }
}

TEST_CASE("dataset validation") {
    auto ds = handmade({"a", "b"});
    CHECK_NOTHROW(ds.validate());
    ds.items[1].id = ds.items[0].id;
    CHECK_THROWS_AS(ds.validate(), ValidationError);
    ds = handmade({"a", "b"});
    ds.items[1].choices.pop_back();
    CHECK_THROWS_AS(ds.validate(), ValidationError);
}
