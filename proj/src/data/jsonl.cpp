#include "dlab/data/jsonl.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "dlab/errors.hpp"

namespace dlab::data {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "dlab-mcq";
constexpr int kVersion = 1;

json task_to_json(const TaskSpec& t) {
    return json{{"concept_count", t.concept_count},
                {"attributes_per_concept", t.attributes_per_concept},
                {"noise_token_pool", t.noise_token_pool},
                {"question_noise_len", t.question_noise_len},
                {"context_attributes", t.context_attributes},
                {"template_count", t.template_count},
                {"n_choices", t.n_choices},
                {"knowledge_seed", t.knowledge_seed}};
}

TaskSpec task_from_json(const json& j) {
    TaskSpec t;
    t.concept_count = j.at("concept_count").get<std::size_t>();
    t.attributes_per_concept = j.at("attributes_per_concept").get<std::size_t>();
    t.noise_token_pool = j.at("noise_token_pool").get<std::size_t>();
    t.question_noise_len = j.at("question_noise_len").get<std::size_t>();
    t.context_attributes = j.at("context_attributes").get<std::size_t>();
    t.template_count = j.at("template_count").get<std::size_t>();
    t.n_choices = j.at("n_choices").get<std::size_t>();
    t.knowledge_seed = j.at("knowledge_seed").get<std::uint64_t>();
    return t;
}

json manifest_json(const Manifest& m) {
    json j{{"generator", m.generator}, {"size", m.size}, {"seed", m.seed}};
    j["task"] = m.task ? task_to_json(*m.task) : json(nullptr);
    j["alignment"] = m.alignment ? json{{"rho", m.alignment->rho}, {"template_overlap", m.alignment->template_overlap}}
                                 : json(nullptr);
    j["excluded_benchmark"] = m.excluded_benchmark
                                  ? json{{"size", m.excluded_benchmark->first}, {"seed", m.excluded_benchmark->second}}
                                  : json(nullptr);
    json steps = json::array();
    for (const auto& s : m.corruptions) {
        steps.push_back(json{{"mode", to_string(s.mode.kind)},
                             {"fill", std::string(1, s.mode.fill)},
                             {"question_len", s.mode.question_len},
                             {"choice_len", s.mode.choice_len},
                             {"seed", s.seed}});
    }
    j["corruptions"] = std::move(steps);
    return j;
}

Manifest manifest_parse(const json& j) {
    Manifest m;
    m.generator = j.at("generator").get<std::string>();
    m.size = j.at("size").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("task") && !j["task"].is_null()) m.task = task_from_json(j["task"]);
    if (j.contains("alignment") && !j["alignment"].is_null()) {
        m.alignment = AlignmentSpec{j["alignment"].at("rho").get<double>(),
                                    j["alignment"].at("template_overlap").get<double>()};
    }
    if (j.contains("excluded_benchmark") && !j["excluded_benchmark"].is_null()) {
        m.excluded_benchmark = std::make_pair(j["excluded_benchmark"].at("size").get<std::size_t>(),
                                              j["excluded_benchmark"].at("seed").get<std::uint64_t>());
    }
    if (j.contains("corruptions")) {
        for (const auto& s : j["corruptions"]) {
            CorruptionStep step;
            step.mode.kind = corruption_kind_from_string(s.at("mode").get<std::string>());
            const auto fill = s.at("fill").get<std::string>();
            if (fill.size() != 1) throw FormatError("corruption fill must be one character");
            step.mode.fill = fill[0];
            step.mode.question_len = s.at("question_len").get<std::size_t>();
            step.mode.choice_len = s.at("choice_len").get<std::size_t>();
            step.seed = s.at("seed").get<std::uint64_t>();
            m.corruptions.push_back(step);
        }
    }
    return m;
}

std::string line_error(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

} // namespace

std::string manifest_to_json(const Manifest& manifest) { return manifest_json(manifest).dump(); }

Manifest manifest_from_json(const std::string& text) {
    try {
        return manifest_parse(json::parse(text));
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad manifest: ") + e.what());
    }
}

void write_jsonl(const Dataset& ds, std::ostream& out) {
    json header{{"format", kFormat},
                {"version", kVersion},
                {"role", to_string(ds.role)},
                {"manifest", manifest_json(ds.manifest)}};
    out << header.dump() << '\n';
    for (const auto& item : ds.items) {
        json j{{"id", item.id},
               {"question", item.question},
               {"choices", item.choices},
               {"answer", item.answer},
               {"meta", item.meta}};
        out << j.dump() << '\n';
    }
}

void write_jsonl(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_jsonl(ds, out);
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Dataset read_jsonl(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError(line_error(lineno, std::string("malformed JSON: ") + e.what()));
        }
        if (!j.is_object()) throw FormatError(line_error(lineno, "expected a JSON object"));

        if (!have_header) {
            if (!j.contains("role") || !j.contains("manifest")) {
                throw FormatError(line_error(lineno, "missing dataset header (role, manifest)"));
            }
            try {
                if (j.value("format", std::string()) != kFormat) throw FormatError("unknown format tag");
                if (j.value("version", 0) != kVersion) throw FormatError("unsupported version");
                ds.role = role_from_string(j.at("role").get<std::string>());
                ds.manifest = manifest_parse(j.at("manifest"));
            } catch (const json::exception& e) {
                throw FormatError(line_error(lineno, std::string("bad header: ") + e.what()));
            } catch (const FormatError& e) {
                throw FormatError(line_error(lineno, e.what()));
            } catch (const ConfigError& e) {
                throw FormatError(line_error(lineno, e.what()));
            }
            have_header = true;
            continue;
        }

        MCQItem item;
        try {
            item.id = j.at("id").get<std::string>();
            item.question = j.at("question").get<std::string>();
            item.choices = j.at("choices").get<std::vector<std::string>>();
            const auto& answer = j.at("answer");
            if (!answer.is_number_integer() || answer.get<long long>() < 0) {
                throw FormatError("answer must be a non-negative integer");
            }
            item.answer = answer.get<std::size_t>();
            if (j.contains("meta")) item.meta = j["meta"].get<std::map<std::string, std::string>>();
        } catch (const json::exception& e) {
            throw FormatError(line_error(lineno, std::string("bad item: ") + e.what()));
        } catch (const FormatError& e) {
            throw FormatError(line_error(lineno, e.what()));
        }
        if (item.answer >= item.choices.size()) {
            throw ValidationError(line_error(lineno, "item '" + item.id + "' has answer " +
                                                         std::to_string(item.answer) + " but only " +
                                                         std::to_string(item.choices.size()) + " choices"));
        }
        ds.items.push_back(std::move(item));
    }
    if (!have_header) throw FormatError("missing dataset header: file is empty");
    ds.validate();
    return ds;
}

Dataset read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_jsonl(in);
}

} // namespace dlab::data
