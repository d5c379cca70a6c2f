#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "recall/random_stream.hpp"
#include "recall/recall_core.hpp"

namespace recall {

// How one scenario variable is drawn. Parameter meaning depends on the kind:
//   Uniform        Unif(a, b)
//   PowerOfBase    a * b^Unif(c, d)
//   UniformPower   a * Unif(b, c)^d
//   PrecisionFloor Unif(bound(a, b*prevalence, c*R1/N), d)
//   CappedUniform  Unif(a, cap(b, floor(N_s / c)))          (sample sizes)
//   Fraction       N_s * Unif(a, b)                          (sample sizes)
//   Doubling       a * 2^Unif(0, cap(b, floor(log2(N_s / a)))), exponent
//                  continuous when c == 0 and a uniform integer otherwise
// bound() is max() and cap() is min() unless the scenario is literal, in which
// case the two are swapped.
enum class DrawKind {
    Uniform,
    PowerOfBase,
    UniformPower,
    PrecisionFloor,
    CappedUniform,
    Fraction,
    Doubling,
};

struct VariableDraw {
    DrawKind kind = DrawKind::Uniform;
    std::array<double, 4> p{};
};

struct ScenarioSpec {
    std::string name;
    VariableDraw population;   // N_*
    VariableDraw prevalence;   // pi_*
    VariableDraw recall;       // Rec
    VariableDraw precision;    // Prec
    VariableDraw retrieved_sample;
    VariableDraw unretrieved_sample;
    bool literal_bounds = false;

    void validate() const;
};

ScenarioSpec builtin_scenario(std::string_view name);

// The continuous draws behind one realization, before integerisation.
struct ScenarioDraw {
    double population = 0.0;
    double prevalence = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

struct Realization {
    ScenarioDraw draw;
    RealizationTruth truth;
    SampleDesign design;
};

inline constexpr int kMaxScenarioRetries = 1000;

// Throws ScenarioSamplingError after kMaxScenarioRetries infeasible draws.
Realization sample_realization(const ScenarioSpec& spec, RandomStream& rng);

// Plain-text scenario file, one `key = kind params...` per line:
//   name = custom
//   population = uniform 1e3 4e6
//   prevalence = power 2e-3 1.5 1 10
//   recall = unif_power 2.5e-3 1 34 1.65
//   precision = precision_floor 0.025 0 2 0.92
//   retrieved_sample = doubling 20 8 continuous
//   unretrieved_sample = capped_uniform 10 4000 10
//   bounds = corrected | literal
// Blank lines and '#' comments are ignored.
ScenarioSpec read_scenario_config(std::istream& in);
ScenarioSpec read_scenario_config_file(const std::string& path);

// Either a built-in name or a path to a scenario file.
ScenarioSpec resolve_scenario(const std::string& name_or_path);

}  // namespace recall
