#include "dlab/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dlab/errors.hpp"

namespace dlab::harness {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ',')) {
        auto t = trim(cur);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ", ";
        out += p;
    }
    return out;
}

[[noreturn]] void reject(const std::string& key, const std::string& value, const std::string& why) {
    throw ConfigError(key + " = '" + value + "' " + why);
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) reject(key, text, "is not a non-negative integer");
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& text, std::size_t min) {
    const auto v = parse_u64(key, text);
    if (v < min) reject(key, text, "is below the minimum " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

double parse_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (text.empty() || used != text.size()) reject(key, text, "is not a number");
    return v;
}

double parse_unit(const std::string& key, const std::string& text) {
    const double v = parse_real(key, text);
    if (!(v >= 0.0 && v <= 1.0)) reject(key, text, "is outside the bound [0, 1]");
    return v;
}

double parse_non_negative(const std::string& key, const std::string& text) {
    const double v = parse_real(key, text);
    if (!(v >= 0.0) || v == std::numeric_limits<double>::infinity()) reject(key, text, "is outside the bound [0, inf)");
    return v;
}

double parse_positive(const std::string& key, const std::string& text) {
    const double v = parse_real(key, text);
    if (!(v > 0.0) || v == std::numeric_limits<double>::infinity()) reject(key, text, "is outside the bound (0, inf)");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    reject(key, text, "is not a boolean (true or false)");
}

struct Field {
    const char* section;
    const char* name;
    std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

std::string count(std::size_t v) { return std::to_string(v); }

// Corruption parameters live next to the mode; a missing mode keeps the
// defaults around so the parameter keys still round-trip.
data::CorruptionMode& corruption_slot(ExperimentConfig& c) {
    if (!c.laundering.corruption) c.laundering.corruption = data::CorruptionMode{};
    return *c.laundering.corruption;
}

const std::vector<Field>& fields() {
    using E = ExperimentConfig;
    using S = const std::string&;
    static const std::vector<Field> table = {
        {"bench", "size", [](E& c, S k, S v) { c.laundering.bench_size = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.bench_size); }},
        {"bench", "max_len", [](E& c, S k, S v) { c.laundering.max_len = parse_count(k, v, 4); },
         [](const E& c) { return count(c.laundering.max_len); }},
        {"bench", "concept_count", [](E& c, S k, S v) { c.laundering.bench.concept_count = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.bench.concept_count); }},
        {"bench", "attributes_per_concept",
         [](E& c, S k, S v) { c.laundering.bench.attributes_per_concept = parse_count(k, v, 2); },
         [](const E& c) { return count(c.laundering.bench.attributes_per_concept); }},
        {"bench", "noise_token_pool",
         [](E& c, S k, S v) { c.laundering.bench.noise_token_pool = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.bench.noise_token_pool); }},
        {"bench", "question_noise_len",
         [](E& c, S k, S v) { c.laundering.bench.question_noise_len = parse_count(k, v, 0); },
         [](const E& c) { return count(c.laundering.bench.question_noise_len); }},
        {"bench", "context_attributes",
         [](E& c, S k, S v) { c.laundering.bench.context_attributes = parse_count(k, v, 0); },
         [](const E& c) { return count(c.laundering.bench.context_attributes); }},
        {"bench", "template_count", [](E& c, S k, S v) { c.laundering.bench.template_count = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.bench.template_count); }},
        {"bench", "n_choices", [](E& c, S k, S v) { c.laundering.bench.n_choices = parse_count(k, v, 2); },
         [](const E& c) { return count(c.laundering.bench.n_choices); }},

        {"intermediate", "size", [](E& c, S k, S v) { c.laundering.intermediate_size = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.intermediate_size); }},
        {"intermediate", "rho", [](E& c, S k, S v) { c.laundering.align.rho = parse_unit(k, v); },
         [](const E& c) { return format_real(c.laundering.align.rho); }},
        {"intermediate", "template_overlap",
         [](E& c, S k, S v) { c.laundering.align.template_overlap = parse_unit(k, v); },
         [](const E& c) { return format_real(c.laundering.align.template_overlap); }},
        {"intermediate", "corruption",
         [](E& c, S k, S v) {
             if (v == "none") {
                 c.laundering.corruption.reset();
                 return;
             }
             try {
                 corruption_slot(c).kind = data::corruption_kind_from_string(v);
             } catch (const std::exception&) {
                 reject(k, v, "is not one of none, random_choices, identical_choices, "
                              "random_questions_and_choices, identical_questions_and_choices");
             }
         },
         [](const E& c) { return c.laundering.corruption ? to_string(c.laundering.corruption->kind) : "none"; }},
        {"intermediate", "corruption_fill",
         [](E& c, S k, S v) {
             if (v.size() != 1 || v[0] < 'a' || v[0] > 'z') reject(k, v, "is not a single letter in [a, z]");
             corruption_slot(c).fill = v[0];
         },
         [](const E& c) {
             return std::string(1, c.laundering.corruption ? c.laundering.corruption->fill : data::CorruptionMode{}.fill);
         }},
        {"intermediate", "corruption_question_len",
         [](E& c, S k, S v) { corruption_slot(c).question_len = parse_count(k, v, 1); },
         [](const E& c) {
             return count(c.laundering.corruption ? c.laundering.corruption->question_len
                                                  : data::CorruptionMode{}.question_len);
         }},
        {"intermediate", "corruption_choice_len",
         [](E& c, S k, S v) { corruption_slot(c).choice_len = parse_count(k, v, 1); },
         [](const E& c) {
             return count(c.laundering.corruption ? c.laundering.corruption->choice_len
                                                  : data::CorruptionMode{}.choice_len);
         }},

        {"teacher", "embed_dim", [](E& c, S k, S v) { c.laundering.teacher_arch.embed_dim = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.teacher_arch.embed_dim); }},
        {"teacher", "hidden_dim", [](E& c, S k, S v) { c.laundering.teacher_arch.hidden_dim = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.teacher_arch.hidden_dim); }},
        {"teacher", "hidden_layers",
         [](E& c, S k, S v) { c.laundering.teacher_arch.hidden_layers = parse_count(k, v, 0); },
         [](const E& c) { return count(c.laundering.teacher_arch.hidden_layers); }},
        {"teacher", "epochs", [](E& c, S k, S v) { c.laundering.teacher_train.epochs = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.teacher_train.epochs); }},
        {"teacher", "batch_size", [](E& c, S k, S v) { c.laundering.teacher_train.batch_size = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.teacher_train.batch_size); }},
        {"teacher", "learning_rate",
         [](E& c, S k, S v) { c.laundering.teacher_train.learning_rate = parse_non_negative(k, v); },
         [](const E& c) { return format_real(c.laundering.teacher_train.learning_rate); }},
        {"teacher", "weight_decay",
         [](E& c, S k, S v) { c.laundering.teacher_train.weight_decay = parse_non_negative(k, v); },
         [](const E& c) { return format_real(c.laundering.teacher_train.weight_decay); }},

        {"student", "embed_dim", [](E& c, S k, S v) { c.laundering.student_arch.embed_dim = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.student_arch.embed_dim); }},
        {"student", "hidden_dim", [](E& c, S k, S v) { c.laundering.student_arch.hidden_dim = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.student_arch.hidden_dim); }},
        {"student", "hidden_layers",
         [](E& c, S k, S v) { c.laundering.student_arch.hidden_layers = parse_count(k, v, 0); },
         [](const E& c) { return count(c.laundering.student_arch.hidden_layers); }},

        {"distill", "alpha", [](E& c, S k, S v) { c.laundering.distill.alpha = parse_unit(k, v); },
         [](const E& c) { return format_real(c.laundering.distill.alpha); }},
        {"distill", "temperature", [](E& c, S k, S v) { c.laundering.distill.temperature = parse_positive(k, v); },
         [](const E& c) { return format_real(c.laundering.distill.temperature); }},
        {"distill", "soft_loss",
         [](E& c, S k, S v) {
             if (v != "mse" && v != "kld") reject(k, v, "is not one of mse, kld");
             c.laundering.distill.soft_loss = model::soft_loss_from_string(v);
         },
         [](const E& c) { return model::to_string(c.laundering.distill.soft_loss); }},
        {"distill", "mse_use_temperature",
         [](E& c, S k, S v) { c.laundering.distill.mse_use_temperature = parse_bool(k, v); },
         [](const E& c) { return std::string(c.laundering.distill.mse_use_temperature ? "true" : "false"); }},
        {"distill", "epochs", [](E& c, S k, S v) { c.laundering.distill.epochs = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.distill.epochs); }},
        {"distill", "batch_size", [](E& c, S k, S v) { c.laundering.distill.batch_size = parse_count(k, v, 1); },
         [](const E& c) { return count(c.laundering.distill.batch_size); }},
        {"distill", "learning_rate",
         [](E& c, S k, S v) { c.laundering.distill.learning_rate = parse_non_negative(k, v); },
         [](const E& c) { return format_real(c.laundering.distill.learning_rate); }},
        {"distill", "weight_decay",
         [](E& c, S k, S v) { c.laundering.distill.weight_decay = parse_non_negative(k, v); },
         [](const E& c) { return format_real(c.laundering.distill.weight_decay); }},

        {"sweep", "seeds",
         [](E& c, S k, S v) {
             c.laundering.seeds.clear();
             for (const auto& s : split_list(v)) c.laundering.seeds.push_back(parse_u64(k, s));
             if (c.laundering.seeds.empty()) reject(k, v, "must list at least one seed");
         },
         [](const E& c) {
             std::vector<std::string> parts;
             for (auto s : c.laundering.seeds) parts.push_back(std::to_string(s));
             return join(parts);
         }},
        {"sweep", "axis",
         [](E& c, S k, S v) {
             if (v == "none") {
                 c.sweep.axis.reset();
                 return;
             }
             try {
                 c.sweep.axis = pipeline::sweep_axis_from_string(v);
             } catch (const ConfigError&) {
                 reject(k, v, "is not one of none, alpha, size, loss, rho");
             }
         },
         [](const E& c) { return c.sweep.axis ? pipeline::to_string(*c.sweep.axis) : std::string("none"); }},
        {"sweep", "values", [](E& c, S, S v) { c.sweep.values = split_list(v); },
         [](const E& c) { return join(c.sweep.values); }},
        {"sweep", "iterations", [](E& c, S k, S v) { c.sweep.iterations = parse_count(k, v, 1); },
         [](const E& c) { return count(c.sweep.iterations); }},
    };
    return table;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    // Collect first so corruption parameters apply after the mode regardless of line order.
    std::map<std::pair<std::string, std::string>, std::pair<std::string, std::size_t>> entries;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto comment = raw.find_first_of("#;");
        const auto line = trim(std::string_view(raw).substr(0, comment));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header '" + line + "'");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            bool known = false;
            for (const auto& f : fields()) known = known || section == f.section;
            if (!known) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + line + "'");
        if (section.empty()) throw ConfigError(where + "key outside of any section");
        const auto key = trim(std::string_view(line).substr(0, eq));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        const std::string qualified = "[" + section + "]." + key;
        bool known = false;
        for (const auto& f : fields()) known = known || (section == f.section && key == f.name);
        if (!known) throw ConfigError(where + "unknown key " + qualified);
        if (!entries.emplace(std::pair(section, key), std::pair(value, line_no)).second) {
            throw ConfigError(where + "duplicate key " + qualified);
        }
    }

    ExperimentConfig cfg;
    bool corruption_params = false;
    for (const auto& f : fields()) {
        const auto it = entries.find({f.section, f.name});
        if (it == entries.end()) continue;
        const std::string qualified = std::string("[") + f.section + "]." + f.name;
        const std::string_view name = f.name;
        if (name.starts_with("corruption_")) corruption_params = true;
        f.set(cfg, qualified, it->second.first);
    }
    // Parameters given without a mode (or with mode none) describe no corruption.
    const auto mode = entries.find({"intermediate", "corruption"});
    if (corruption_params && (mode == entries.end() || mode->second.first == "none")) cfg.laundering.corruption.reset();

    if (cfg.sweep.axis && cfg.sweep.values.empty()) throw ConfigError("[sweep].values must be non-empty when an axis is set");
    cfg.laundering.validate();
    if (cfg.laundering.corruption) cfg.laundering.corruption->validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("run manifest " + path.string() + " is not valid JSON: " + e.what());
        }
        if (!j.contains("config") || !j["config"].is_string()) {
            throw ConfigError("run manifest " + path.string() + " has no \"config\" string");
        }
        return parse_config(j["config"].get<std::string>());
    }
    return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (section != f.section) {
            if (!section.empty()) out += '\n';
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += std::string(f.name) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

} // namespace dlab::harness
