#include "dlab/data/generator.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "dlab/autodiff/rng.hpp"
#include "dlab/data/corruption.hpp"
#include "dlab/errors.hpp"

namespace dlab::data {

namespace {

constexpr std::size_t kMaxConsecutiveRejections = 1000;

constexpr std::array<const char*, 20> kBenchmarkWords = {
    "which", "property", "best",  "fits",    "the",   "of",    "is",     "true",  "for",   "regarding",
    "select", "correct", "about", "known",   "feature", "given", "what", "typical", "trait", "choose"};

constexpr std::array<const char*, 20> kIntermediateWords = {
    "patient", "presents", "with",  "most",  "likely", "finding", "in",    "sign",  "seen",  "case",
    "common",  "expected", "noted", "exam",  "shows",  "usual",   "cause", "drug",  "dose",  "history"};

std::string noise_token(std::size_t i) { return "w" + std::to_string(i); }

template <std::size_t N>
QuestionTemplate make_template(Rng& rng, const std::array<const char*, N>& bank) {
    QuestionTemplate t;
    const std::size_t len = 3 + static_cast<std::size_t>(rng.below(3));
    for (std::size_t i = 0; i < len; ++i) t.words.emplace_back(bank[rng.below(N)]);
    t.concept_slot = static_cast<std::size_t>(rng.below(len + 1));
    return t;
}

struct ConceptRef {
    bool benchmark_pool;
    std::size_t index;
};

MCQItem build_item(Rng& rng, const TaskSpec& spec, const QuestionTemplate& tmpl, std::size_t template_id,
                   ConceptRef topic, std::size_t correct_attribute, const std::string& id) {
    const auto ctok = concept_token(topic.benchmark_pool, topic.index);
    std::string question;
    auto append = [&question](const std::string& w) {
        if (!question.empty()) question += ' ';
        question += w;
    };
    for (std::size_t i = 0; i <= tmpl.words.size(); ++i) {
        if (i == tmpl.concept_slot) append(ctok);
        if (i < tmpl.words.size()) append(tmpl.words[i]);
    }
    for (std::size_t i = 0; i < spec.context_attributes; ++i) {
        append(attribute_token(topic.benchmark_pool, topic.index, rng.below(spec.attributes_per_concept)));
    }
    for (std::size_t i = 0; i < spec.question_noise_len; ++i) append(noise_token(rng.below(spec.noise_token_pool)));

    std::vector<std::size_t> wrong;
    for (std::size_t a = 0; a < spec.attributes_per_concept; ++a) {
        if (a != correct_attribute) wrong.push_back(a);
    }
    rng.shuffle(std::span<std::size_t>(wrong));

    MCQItem item;
    item.id = id;
    item.question = std::move(question);
    item.answer = static_cast<std::size_t>(rng.below(spec.n_choices));
    item.choices.resize(spec.n_choices);
    std::size_t next_wrong = 0;
    for (std::size_t pos = 0; pos < spec.n_choices; ++pos) {
        const std::size_t attr = pos == item.answer ? correct_attribute : wrong[next_wrong++];
        item.choices[pos] = attribute_token(topic.benchmark_pool, topic.index, attr);
    }
    item.meta["concept"] = ctok;
    item.meta["template"] = std::to_string(template_id);
    return item;
}

std::string item_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%06zu", prefix, i);
    return buf;
}

} // namespace

std::string concept_token(bool benchmark_pool, std::size_t index) {
    return (benchmark_pool ? "c" : "d") + std::to_string(index);
}

std::string attribute_token(bool benchmark_pool, std::size_t concept_index, std::size_t attribute) {
    return concept_token(benchmark_pool, concept_index) + "p" + std::to_string(attribute);
}

std::vector<QuestionTemplate> benchmark_templates(const TaskSpec& spec) {
    Rng rng = Rng(spec.knowledge_seed).stream("templates.benchmark");
    std::vector<QuestionTemplate> out;
    for (std::size_t i = 0; i < spec.template_count; ++i) out.push_back(make_template(rng, kBenchmarkWords));
    return out;
}

std::vector<QuestionTemplate> intermediate_templates(const TaskSpec& spec, const AlignmentSpec& align,
                                                     std::uint64_t seed) {
    const auto shared_count = static_cast<std::size_t>(
        std::llround(align.template_overlap * static_cast<double>(spec.template_count)));
    auto out = benchmark_templates(spec);
    out.resize(std::min(shared_count, out.size()));
    Rng rng = Rng(seed).stream("templates.intermediate");
    while (out.size() < spec.template_count) out.push_back(make_template(rng, kIntermediateWords));
    return out;
}

Dataset gen_benchmark(const TaskSpec& spec, std::size_t size, std::uint64_t seed) {
    spec.validate();
    if (size == 0) throw ContractError("benchmark size must be at least 1");
    const auto templates = benchmark_templates(spec);
    const auto knowledge = spec.knowledge_map();
    const Rng root(seed);

    Dataset ds;
    ds.role = Role::BenchmarkTest;
    ds.items.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        Rng rng = root.stream("item", i);
        const auto concept_index = static_cast<std::size_t>(rng.below(spec.concept_count));
        const auto t = static_cast<std::size_t>(rng.below(templates.size()));
        ds.items.push_back(
            build_item(rng, spec, templates[t], t, {true, concept_index}, knowledge[concept_index], item_id("bench", i)));
    }
    ds.manifest.generator = "benchmark";
    ds.manifest.task = spec;
    ds.manifest.size = size;
    ds.manifest.seed = seed;
    return ds;
}

namespace {

Dataset generate_intermediate(const TaskSpec& spec, const AlignmentSpec& align, std::size_t size,
                              std::uint64_t seed, const std::unordered_set<std::uint64_t>& forbidden) {
    spec.validate();
    align.validate();
    if (size == 0) throw ContractError("intermediate size must be at least 1");
    const auto templates = intermediate_templates(spec, align, seed);

    // Independent knowledge map over benchmark concepts [0, C) and pool concepts [C, 2C).
    Rng kr = Rng(seed).stream("knowledge.intermediate");
    std::vector<std::size_t> knowledge(2 * spec.concept_count);
    for (auto& k : knowledge) k = static_cast<std::size_t>(kr.below(spec.attributes_per_concept));

    const Rng root(seed);
    Dataset ds;
    ds.role = Role::IntermediateTrain;
    ds.items.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        Rng rng = root.stream("item", i);
        std::size_t rejections = 0;
        while (true) {
            const bool shared = rng.uniform() < align.rho;
            const auto index = static_cast<std::size_t>(rng.below(spec.concept_count));
            const auto t = static_cast<std::size_t>(rng.below(templates.size()));
            const std::size_t correct = knowledge[shared ? index : spec.concept_count + index];
            MCQItem item = build_item(rng, spec, templates[t], t, {shared, index}, correct, item_id("inter", i));
            if (forbidden.count(content_hash(item)) == 0) {
                ds.items.push_back(std::move(item));
                break;
            }
            if (++rejections >= kMaxConsecutiveRejections) {
                throw GenerationError("intermediate item " + std::to_string(i) + " collided with the benchmark " +
                                      std::to_string(rejections) +
                                      " times in a row; the task spec is too small for the requested size");
            }
        }
    }
    ds.manifest.generator = "intermediate";
    ds.manifest.task = spec;
    ds.manifest.alignment = align;
    ds.manifest.size = size;
    ds.manifest.seed = seed;
    return ds;
}

} // namespace

Dataset gen_intermediate(const TaskSpec& bench_spec, const AlignmentSpec& align, std::size_t size,
                         std::uint64_t seed, const Dataset& exclude) {
    std::unordered_set<std::uint64_t> forbidden;
    for (const auto& item : exclude.items) forbidden.insert(content_hash(item));
    Dataset ds = generate_intermediate(bench_spec, align, size, seed, forbidden);
    const auto& em = exclude.manifest;
    if (em.generator == "benchmark" && em.task && em.corruptions.empty()) {
        ds.manifest.excluded_benchmark = std::make_pair(em.size, em.seed);
    }
    return ds;
}

Dataset gen_intermediate(const TaskSpec& bench_spec, const AlignmentSpec& align, std::size_t size,
                         std::uint64_t seed) {
    return generate_intermediate(bench_spec, align, size, seed, {});
}

Dataset replay(const Manifest& manifest) {
    Dataset ds;
    if (manifest.generator == "benchmark" && manifest.task) {
        ds = gen_benchmark(*manifest.task, manifest.size, manifest.seed);
    } else if (manifest.generator == "intermediate" && manifest.task && manifest.alignment) {
        if (manifest.excluded_benchmark) {
            const auto bench =
                gen_benchmark(*manifest.task, manifest.excluded_benchmark->first, manifest.excluded_benchmark->second);
            ds = gen_intermediate(*manifest.task, *manifest.alignment, manifest.size, manifest.seed, bench);
        } else {
            ds = gen_intermediate(*manifest.task, *manifest.alignment, manifest.size, manifest.seed);
        }
    } else {
        throw ContractError("manifest with generator '" + manifest.generator + "' cannot be replayed");
    }
    for (const auto& step : manifest.corruptions) ds = corrupt(ds, step.mode, step.seed);
    return ds;
}

} // namespace dlab::data
