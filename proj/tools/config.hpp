#pragma once

#include "fdlpv/analysis.hpp"
#include "fdlpv/etfe.hpp"
#include "fdlpv/plant.hpp"
#include "fdlpv/scenario.hpp"
#include "fdlpv/synthesis.hpp"
#include "fdlpv/weights.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fdlpv::cli {

inline constexpr int kConfigVersion = 1;

enum class PlantKind { Surrogate, Dataset };

struct Paths {
    std::string output_dir = "out";
    std::string records_dir;  // default: output_dir
    std::string dataset;      // default: output_dir/dataset.csv
    std::string result;
    std::string controller;
    std::string certificate;
    std::string report_dir;
};

struct PipelineConfig {
    int version = kConfigVersion;
    std::uint64_t seed = 1;
    bool paper_scale = false;

    PlantKind plant = PlantKind::Surrogate;
    std::string model_path;  // empty: built-in surrogate_v1
    Paths paths;

    std::vector<double> points{30.0, 40.0, 50.0};
    ExperimentOptions experiment;
    size_t frequencies = 512;
    Window window = Window::Hann;
    int segments = 4;
    std::vector<double> controller0_num{0.7, -0.63};
    std::vector<double> controller0_den{1.0, -0.95};
    bool project_bezout = true;

    double obf_pole = 0.7;
    int order_n = 5;
    int order_d = 5;
    SchedulingKind scheduling = SchedulingKind::Affine;
    int scheduling_degree = 1;

    DefaultWeightOptions weight_defaults;
    // Explicit per-channel filters (descending coefficients); missing channels use the defaults.
    std::array<std::optional<std::pair<std::vector<double>, std::vector<double>>>, 4> weight_tf;
    SynthesisOptions synthesis;
    bool lti = false;

    std::optional<double> analysis_gamma;
    MultiplierOptions multiplier;

    ScenarioOptions scenario;
    // Empty: time-varying run; otherwise one frozen run per value.
    std::vector<double> frozen;

    [[nodiscard]] std::string records_dir() const;
    [[nodiscard]] std::string dataset_path() const;
    [[nodiscard]] std::string result_path() const;
    [[nodiscard]] std::string controller_path() const;
    [[nodiscard]] std::string certificate_path() const;
    [[nodiscard]] std::string report_dir() const;

    [[nodiscard]] LpvSurrogateModel model() const;
    [[nodiscard]] RationalTf controller0(double sample_rate) const;
    [[nodiscard]] WeightSet weights(double sample_rate) const;

    // Cross-field checks; throws Error(Config).
    void validate() const;
};

// Parses the nested JSON schema documented in docs/config.md. Unknown keys are rejected.
[[nodiscard]] PipelineConfig parse_config(const std::string& text);
[[nodiscard]] PipelineConfig load_config(const std::string& path);

// 240000-sample records and 1000 frequencies.
void apply_paper_scale(PipelineConfig& config);

// Records the effective configuration next to the outputs.
[[nodiscard]] std::string config_to_json(const PipelineConfig& config);

} // namespace fdlpv::cli
