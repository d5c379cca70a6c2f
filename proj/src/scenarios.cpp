#include "recall/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <istream>
#include <sstream>
#include <vector>

#include "recall/errors.hpp"

namespace recall {

namespace {

VariableDraw make(DrawKind kind, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    return {kind, {a, b, c, d}};
}

double uniform(RandomStream& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

// Draws for the variables that depend only on constants.
double draw_free(const VariableDraw& v, RandomStream& rng) {
    const auto& p = v.p;
    switch (v.kind) {
        case DrawKind::Uniform: return uniform(rng, p[0], p[1]);
        case DrawKind::PowerOfBase: return p[0] * std::pow(p[1], uniform(rng, p[2], p[3]));
        case DrawKind::UniformPower: return p[0] * std::pow(uniform(rng, p[1], p[2]), p[3]);
        default: throw DomainError("variable kind needs context from earlier draws");
    }
}

// Sample size for a segment of `size` documents; nullopt when the range is empty.
std::optional<std::int64_t> draw_sample_size(const VariableDraw& v, std::int64_t size, bool literal,
                                             RandomStream& rng) {
    const auto& p = v.p;
    const auto cap = [literal](double a, double b) { return literal ? std::max(a, b) : std::min(a, b); };
    const auto N = static_cast<double>(size);
    double value = 0.0;
    switch (v.kind) {
        case DrawKind::CappedUniform: {
            const double hi = cap(p[1], std::floor(N / p[2]));
            if (hi < p[0]) {
                return std::nullopt;
            }
            value = uniform(rng, p[0], hi);
            break;
        }
        case DrawKind::Fraction: value = N * uniform(rng, p[0], p[1]); break;
        case DrawKind::Doubling: {
            if (N < p[0]) {
                return std::nullopt;
            }
            const double top = cap(p[1], std::floor(std::log2(N / p[0])));
            double exponent = 0.0;
            if (p[2] == 0.0) {
                exponent = uniform(rng, 0.0, top);
            } else {
                const auto steps = static_cast<std::uint64_t>(top) + 1;
                exponent = static_cast<double>(rng() % steps);
            }
            value = p[0] * std::exp2(exponent);
            break;
        }
        default: value = draw_free(v, rng); break;
    }
    return std::clamp<std::int64_t>(std::llround(value), 1, size);
}

std::optional<Realization> try_realization(const ScenarioSpec& spec, RandomStream& rng) {
    Realization out;
    out.draw.population = draw_free(spec.population, rng);
    out.draw.prevalence = draw_free(spec.prevalence, rng);
    out.draw.recall = draw_free(spec.recall, rng);

    const std::int64_t total = std::llround(out.draw.population);
    const std::int64_t relevant = std::llround(static_cast<double>(total) * out.draw.prevalence);
    if (total < 2 || relevant < 1 || relevant > total) {
        return std::nullopt;
    }
    const std::int64_t retrieved_yield =
        std::llround(static_cast<double>(relevant) * out.draw.recall);

    const auto& pp = spec.precision.p;
    if (spec.precision.kind == DrawKind::PrecisionFloor) {
        const double a = pp[0];
        const double b = pp[1] * out.draw.prevalence;
        const double c = pp[2] * static_cast<double>(retrieved_yield) / static_cast<double>(total);
        const double lo = spec.literal_bounds ? std::min({a, b, c}) : std::max({a, b, c});
        if (!(lo < pp[3])) {
            return std::nullopt;
        }
        out.draw.precision = uniform(rng, lo, pp[3]);
    } else {
        out.draw.precision = draw_free(spec.precision, rng);
    }
    if (!(out.draw.precision > 0.0)) {
        return std::nullopt;
    }

    auto& t = out.truth;
    t.retrieved_yield = retrieved_yield;
    t.retrieved_size = std::clamp<std::int64_t>(
        std::llround(static_cast<double>(retrieved_yield) / out.draw.precision),
        std::max<std::int64_t>(retrieved_yield, 1), total - 1);
    if (t.retrieved_size < retrieved_yield) {
        return std::nullopt;
    }
    t.unretrieved_size = total - t.retrieved_size;
    t.unretrieved_yield = std::clamp<std::int64_t>(relevant - retrieved_yield, 0, t.unretrieved_size);
    if (t.retrieved_yield + t.unretrieved_yield < 1) {
        return std::nullopt;
    }

    const auto n1 = draw_sample_size(spec.retrieved_sample, t.retrieved_size, spec.literal_bounds, rng);
    if (!n1) {
        return std::nullopt;
    }
    const auto n0 =
        draw_sample_size(spec.unretrieved_sample, t.unretrieved_size, spec.literal_bounds, rng);
    if (!n0) {
        return std::nullopt;
    }
    out.design = {*n1, *n0};
    return out;
}

const std::vector<std::pair<std::string_view, DrawKind>>& kind_names() {
    static const std::vector<std::pair<std::string_view, DrawKind>> names{
        {"uniform", DrawKind::Uniform},
        {"power", DrawKind::PowerOfBase},
        {"unif_power", DrawKind::UniformPower},
        {"precision_floor", DrawKind::PrecisionFloor},
        {"capped_uniform", DrawKind::CappedUniform},
        {"fraction", DrawKind::Fraction},
        {"doubling", DrawKind::Doubling},
    };
    return names;
}

std::size_t parameter_count(DrawKind kind) {
    switch (kind) {
        case DrawKind::Uniform:
        case DrawKind::Fraction: return 2;
        case DrawKind::CappedUniform:
        case DrawKind::Doubling: return 3;
        default: return 4;
    }
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

VariableDraw parse_draw(const std::string& text, std::size_t line) {
    std::istringstream in(text);
    std::string kind_name;
    in >> kind_name;
    const auto& names = kind_names();
    const auto it = std::find_if(names.begin(), names.end(),
                                 [&](const auto& entry) { return entry.first == kind_name; });
    if (it == names.end()) {
        throw ParseError("unknown distribution '" + kind_name + "'", line);
    }
    VariableDraw v;
    v.kind = it->second;
    const std::size_t count = parameter_count(v.kind);
    std::vector<std::string> tokens;
    for (std::string token; in >> token;) {
        tokens.push_back(token);
    }
    if (tokens.size() != count) {
        throw ParseError(kind_name + " takes " + std::to_string(count) + " parameters", line);
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (v.kind == DrawKind::Doubling && i == 2) {
            if (tokens[i] == "continuous") {
                v.p[i] = 0.0;
            } else if (tokens[i] == "integer") {
                v.p[i] = 1.0;
            } else {
                throw ParseError("doubling exponent must be 'continuous' or 'integer'", line);
            }
            continue;
        }
        try {
            std::size_t used = 0;
            v.p[i] = std::stod(tokens[i], &used);
            if (used != tokens[i].size()) {
                throw std::invalid_argument(tokens[i]);
            }
        } catch (const std::logic_error&) {
            throw ParseError("invalid number '" + tokens[i] + "'", line);
        }
    }
    return v;
}

}  // namespace

void ScenarioSpec::validate() const {
    const auto positive_range = [](const VariableDraw& v, const char* what) {
        const auto& p = v.p;
        bool ok = true;
        switch (v.kind) {
            case DrawKind::Uniform: ok = p[0] <= p[1]; break;
            case DrawKind::PowerOfBase: ok = p[0] > 0.0 && p[1] > 0.0 && p[2] <= p[3]; break;
            case DrawKind::UniformPower: ok = p[0] > 0.0 && p[1] >= 0.0 && p[1] <= p[2]; break;
            case DrawKind::PrecisionFloor: ok = p[3] > 0.0 && p[3] <= 1.0; break;
            case DrawKind::CappedUniform: ok = p[0] >= 1.0 && p[2] > 0.0; break;
            case DrawKind::Fraction: ok = p[0] > 0.0 && p[0] <= p[1] && p[1] <= 1.0; break;
            case DrawKind::Doubling: ok = p[0] >= 1.0 && p[1] >= 0.0; break;
        }
        if (!ok) {
            throw DomainError(std::string("invalid parameters for ") + what);
        }
    };
    const auto sample_kind = [](DrawKind k) {
        return k == DrawKind::CappedUniform || k == DrawKind::Fraction || k == DrawKind::Doubling;
    };
    for (const auto* v : {&population, &prevalence, &recall}) {
        if (sample_kind(v->kind) || v->kind == DrawKind::PrecisionFloor) {
            throw DomainError("population, prevalence and recall must be free distributions");
        }
    }
    if (sample_kind(precision.kind)) {
        throw DomainError("precision cannot use a sample-size distribution");
    }
    positive_range(population, "population");
    positive_range(prevalence, "prevalence");
    positive_range(recall, "recall");
    positive_range(precision, "precision");
    positive_range(retrieved_sample, "retrieved_sample");
    positive_range(unretrieved_sample, "unretrieved_sample");
}

ScenarioSpec builtin_scenario(std::string_view name) {
    ScenarioSpec spec;
    spec.name = std::string(name);
    if (name == "neutral") {
        spec.population = make(DrawKind::Uniform, 1e3, 4e6);
        spec.prevalence = make(DrawKind::Uniform, 0.02, 0.8);
        spec.recall = make(DrawKind::Uniform, 0.1, 1.0);
        spec.precision = make(DrawKind::PrecisionFloor, 0.1, 0.95, 1.05, 1.0);
        spec.retrieved_sample = make(DrawKind::CappedUniform, 10, 4000, 10);
        spec.unretrieved_sample = make(DrawKind::CappedUniform, 10, 4000, 10);
    } else if (name == "legal") {
        spec.population = make(DrawKind::PowerOfBase, 5e5, 10, 0, 2);
        spec.prevalence = make(DrawKind::PowerOfBase, 2e-3, 1.5, 1, 10);
        spec.recall = make(DrawKind::UniformPower, 2.5e-3, 1, 34, 1.65);
        spec.precision = make(DrawKind::PrecisionFloor, 0.025, 0.0, 2.0, 0.92);
        spec.retrieved_sample = make(DrawKind::Doubling, 20, 8, 0);
        spec.unretrieved_sample = make(DrawKind::Doubling, 100, 7, 1);
    } else if (name == "small") {
        spec.population = make(DrawKind::Uniform, 1e3, 1e4);
        spec.prevalence = make(DrawKind::Uniform, 0.02, 0.22);
        spec.recall = make(DrawKind::Uniform, 0.1, 1.0);
        spec.precision = make(DrawKind::PrecisionFloor, 0.025, 0.0, 2.0, 0.92);
        spec.retrieved_sample = make(DrawKind::Fraction, 0.2, 0.5);
        spec.unretrieved_sample = make(DrawKind::Fraction, 0.05, 0.3);
    } else {
        throw UnknownScenarioError("unknown scenario '" + std::string(name) +
                                   "' (expected neutral, legal or small)");
    }
    return spec;
}

Realization sample_realization(const ScenarioSpec& spec, RandomStream& rng) {
    for (int attempt = 0; attempt < kMaxScenarioRetries; ++attempt) {
        if (auto r = try_realization(spec, rng)) {
            return *r;
        }
    }
    throw ScenarioSamplingError("scenario '" + spec.name + "' produced no feasible realization in " +
                                std::to_string(kMaxScenarioRetries) + " attempts");
}

ScenarioSpec read_scenario_config(std::istream& in) {
    ScenarioSpec spec;
    spec.name = "custom";
    const std::vector<std::pair<std::string, VariableDraw ScenarioSpec::*>> variables{
        {"population", &ScenarioSpec::population},
        {"prevalence", &ScenarioSpec::prevalence},
        {"recall", &ScenarioSpec::recall},
        {"precision", &ScenarioSpec::precision},
        {"retrieved_sample", &ScenarioSpec::retrieved_sample},
        {"unretrieved_sample", &ScenarioSpec::unretrieved_sample},
    };
    std::vector<bool> seen(variables.size(), false);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = trim(raw);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected 'key = value'", line);
        }
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (key == "name") {
            spec.name = value;
            continue;
        }
        if (key == "bounds") {
            if (value != "corrected" && value != "literal") {
                throw ParseError("bounds must be 'corrected' or 'literal'", line);
            }
            spec.literal_bounds = value == "literal";
            continue;
        }
        const auto it = std::find_if(variables.begin(), variables.end(),
                                     [&](const auto& v) { return v.first == key; });
        if (it == variables.end()) {
            throw ParseError("unknown key '" + key + "'", line);
        }
        spec.*(it->second) = parse_draw(value, line);
        seen[static_cast<std::size_t>(it - variables.begin())] = true;
    }
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (!seen[i]) {
            throw ParseError("missing variable '" + variables[i].first + "'", line + 1);
        }
    }
    spec.validate();
    return spec;
}

ScenarioSpec read_scenario_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return read_scenario_config(in);
}

ScenarioSpec resolve_scenario(const std::string& name_or_path) {
    if (name_or_path == "neutral" || name_or_path == "legal" || name_or_path == "small") {
        return builtin_scenario(name_or_path);
    }
    std::ifstream probe(name_or_path);
    if (!probe) {
        throw UnknownScenarioError("unknown scenario '" + name_or_path +
                                   "' (not a built-in name or readable file)");
    }
    return read_scenario_config(probe);
}

}  // namespace recall
