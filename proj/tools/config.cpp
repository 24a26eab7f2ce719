#include "config.hpp"

#include "fdlpv/error.hpp"
#include "fdlpv/io_util.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <set>

namespace fdlpv::cli {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    fail(ErrorKind::Config, where.empty() ? what : where + ": " + what);
}

// Object reader that remembers which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object())
            config_error(path_.empty() ? "config" : path_, "expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_->contains(key))
            return;
        try {
            out = j_->at(key).get<T>();
        } catch (const json::exception&) {
            config_error(where(key), "wrong type");
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_->contains(key) || j_->at(key).is_null())
            return;
        T v{};
        get(key, v);
        out = v;
    }

    [[nodiscard]] bool has(const char* key) const { return j_->contains(key); }

    [[nodiscard]] std::optional<Section> sub(const char* key) {
        seen_.insert(key);
        if (!j_->contains(key))
            return std::nullopt;
        return Section(j_->at(key), where(key));
    }

    void finish() const {
        for (const auto& item : j_->items())
            if (!seen_.count(item.key()))
                config_error(where(item.key()), "unknown key");
    }

    [[nodiscard]] std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

json coeffs_json(const std::pair<std::vector<double>, std::vector<double>>& tf) {
    return {{"num", tf.first}, {"den", tf.second}};
}

std::pair<std::vector<double>, std::vector<double>> read_tf(Section s) {
    std::pair<std::vector<double>, std::vector<double>> tf;
    s.get("num", tf.first);
    s.get("den", tf.second);
    s.finish();
    if (tf.first.empty() || tf.second.empty())
        config_error(s.where("num"), "num and den must both be non-empty");
    return tf;
}

} // namespace

std::string PipelineConfig::records_dir() const {
    return paths.records_dir.empty() ? paths.output_dir : paths.records_dir;
}
std::string PipelineConfig::dataset_path() const {
    return paths.dataset.empty() ? join(paths.output_dir, "dataset.csv") : paths.dataset;
}
std::string PipelineConfig::result_path() const {
    return paths.result.empty() ? join(paths.output_dir, "result.json") : paths.result;
}
std::string PipelineConfig::controller_path() const {
    return paths.controller.empty() ? join(paths.output_dir, "controller.json") : paths.controller;
}
std::string PipelineConfig::certificate_path() const {
    return paths.certificate.empty() ? join(paths.output_dir, "certificate.json") : paths.certificate;
}
std::string PipelineConfig::report_dir() const {
    return paths.report_dir.empty() ? paths.output_dir : paths.report_dir;
}

LpvSurrogateModel PipelineConfig::model() const {
    if (model_path.empty())
        return LpvSurrogateModel::surrogate_v1();
    try {
        return LpvSurrogateModel::load(model_path);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io)
            config_error("plant.model", e.what());
        throw;
    }
}

RationalTf PipelineConfig::controller0(double sample_rate) const {
    return RationalTf::from_descending(controller0_num, controller0_den, sample_rate);
}

WeightSet PipelineConfig::weights(double sample_rate) const {
    DefaultWeightOptions o = weight_defaults;
    o.sample_rate = sample_rate;
    WeightSet w = default_weights(o);
    for (Channel c : kChannels) {
        const auto& tf = weight_tf[static_cast<size_t>(c)];
        if (tf)
            w[c] = RationalTf::from_descending(tf->first, tf->second, sample_rate);
    }
    w.validate();
    return w;
}

void PipelineConfig::validate() const {
    require(version == kConfigVersion, ErrorKind::Config,
            "version: unsupported config version " + std::to_string(version));
    require(!points.empty(), ErrorKind::Config, "experiment.points: at least one operating point is required");
    for (size_t i = 1; i < points.size(); ++i)
        require(points[i] > points[i - 1], ErrorKind::Config, "experiment.points: must be strictly increasing");
    require(experiment.n_samples >= 64, ErrorKind::Config, "experiment.samples: at least 64 samples are required");
    require(experiment.excitation_std > 0.0, ErrorKind::Config, "experiment.excitation_std: must be positive");
    require(experiment.noise_std >= 0.0, ErrorKind::Config, "experiment.noise_std: must be non-negative");
    require(frequencies >= 8, ErrorKind::Config, "estimation.frequencies: at least 8 frequencies are required");
    require(segments >= 1 && experiment.n_samples / static_cast<size_t>(segments) >= 32, ErrorKind::Config,
            "estimation.segments: segments too short for the record length");
    require(!controller0_num.empty() && !controller0_den.empty() && controller0_den[0] != 0.0, ErrorKind::Config,
            "controller0: num and den must be non-empty with a nonzero leading den coefficient");
    require(std::abs(obf_pole) < 1.0, ErrorKind::Config, "obf.pole: must lie strictly inside (-1, 1)");
    require(order_n >= 0 && order_d >= order_n, ErrorKind::Config, "obf: need 0 <= order_n <= order_d");
    require(scheduling_degree >= 0, ErrorKind::Config, "scheduling.degree: must be non-negative");
    require(scheduling != SchedulingKind::Constant || scheduling_degree == 0, ErrorKind::Config,
            "scheduling.degree: constant scheduling has degree 0");
    require(scheduling != SchedulingKind::Affine || scheduling_degree == 1, ErrorKind::Config,
            "scheduling.degree: affine scheduling has degree 1");
    require(synthesis.gamma_lo > 0.0 && synthesis.gamma_hi > synthesis.gamma_lo, ErrorKind::Config,
            "synthesis: need 0 < gamma_lo < gamma_hi");
    require(synthesis.rel_tolerance > 0.0 || synthesis.abs_tolerance > 0.0, ErrorKind::Config,
            "synthesis.rel_tolerance: a positive bisection tolerance is required");
    require(synthesis.rolloff_order == 0 || synthesis.rolloff_order == 1, ErrorKind::Config,
            "synthesis.rolloff_order: must be 0 or 1");
    require(!analysis_gamma || *analysis_gamma > 0.0, ErrorKind::Config, "analysis.gamma: must be positive");
    require(multiplier.order >= 0, ErrorKind::Config, "analysis.multiplier_order: must be non-negative");
    require(std::abs(multiplier.pole) < 1.0, ErrorKind::Config, "analysis.multiplier_pole: must lie in (-1, 1)");
    require(scenario.duration_s > 0.0, ErrorKind::Config, "scenario.duration_s: must be positive");

    const LpvSurrogateModel m = model();
    for (double p : points)
        require(m.in_range(p), ErrorKind::Config,
                "experiment.points: " + format_double(p) + " outside the plant scheduling range");
    for (double p : frozen)
        require(m.in_range(p), ErrorKind::Config,
                "scenario.frozen: " + format_double(p) + " outside the plant scheduling range");
    require(controller0(m.sample_rate).is_stable(), ErrorKind::Config, "controller0: must be stable");
    try {
        (void)weights(m.sample_rate);
    } catch (const Error& e) {
        config_error("weights", e.what());
    }
}

PipelineConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig c;
    Section root(doc, "");
    root.get("version", c.version);
    root.get("seed", c.seed);

    if (auto s = root.sub("plant")) {
        std::string kind = "surrogate";
        s->get("kind", kind);
        if (kind == "surrogate")
            c.plant = PlantKind::Surrogate;
        else if (kind == "dataset")
            c.plant = PlantKind::Dataset;
        else
            config_error("plant.kind", "expected surrogate or dataset, got '" + kind + "'");
        s->get("model", c.model_path);
        s->finish();
    }
    if (auto s = root.sub("paths")) {
        s->get("output_dir", c.paths.output_dir);
        s->get("records_dir", c.paths.records_dir);
        s->get("dataset", c.paths.dataset);
        s->get("result", c.paths.result);
        s->get("controller", c.paths.controller);
        s->get("certificate", c.paths.certificate);
        s->get("report_dir", c.paths.report_dir);
        s->finish();
    }
    if (auto s = root.sub("experiment")) {
        s->get("points", c.points);
        s->get("samples", c.experiment.n_samples);
        s->get("excitation_std", c.experiment.excitation_std);
        s->get("noise_std", c.experiment.noise_std);
        s->get("warmup", c.experiment.warmup);
        s->finish();
    }
    if (auto s = root.sub("estimation")) {
        s->get("frequencies", c.frequencies);
        std::string window = "hann";
        s->get("window", window);
        try {
            c.window = parse_window(window);
        } catch (const Error& e) {
            config_error("estimation.window", e.what());
        }
        s->get("segments", c.segments);
        s->get("project_bezout", c.project_bezout);
        s->finish();
    }
    if (auto s = root.sub("controller0")) {
        s->get("num", c.controller0_num);
        s->get("den", c.controller0_den);
        s->finish();
    }
    if (auto s = root.sub("obf")) {
        s->get("pole", c.obf_pole);
        s->get("order_n", c.order_n);
        s->get("order_d", c.order_d);
        s->finish();
    }
    if (auto s = root.sub("scheduling")) {
        std::string kind = scheduling_kind_name(c.scheduling);
        s->get("kind", kind);
        try {
            c.scheduling = parse_scheduling_kind(kind);
        } catch (const Error& e) {
            config_error("scheduling.kind", e.what());
        }
        c.scheduling_degree = c.scheduling == SchedulingKind::Constant ? 0 : c.scheduling == SchedulingKind::Affine ? 1 : 2;
        s->get("degree", c.scheduling_degree);
        s->finish();
    }
    if (auto s = root.sub("weights")) {
        DefaultWeightOptions& w = c.weight_defaults;
        s->get("bandwidth_hz", w.bandwidth_hz);
        s->get("peak_sensitivity", w.peak_sensitivity);
        s->get("integrator_leak", w.integrator_leak);
        s->get("process_gain", w.process_gain);
        s->get("control_gain", w.control_gain);
        s->get("rolloff_hz", w.rolloff_hz);
        s->get("rolloff_lf_gain", w.rolloff_lf_gain);
        s->get("rolloff_hf_gain", w.rolloff_hf_gain);
        for (Channel ch : kChannels) {
            if (auto t = s->sub(channel_name(ch)))
                c.weight_tf[static_cast<size_t>(ch)] = read_tf(*t);
        }
        s->finish();
    }
    if (auto s = root.sub("synthesis")) {
        SynthesisOptions& o = c.synthesis;
        s->get("epsilon", o.epsilon);
        s->get("gamma_lo", o.gamma_lo);
        s->get("gamma_hi", o.gamma_hi);
        s->get("rel_tolerance", o.rel_tolerance);
        s->get("abs_tolerance", o.abs_tolerance);
        s->get("integral_action", o.integral_action);
        s->get("rolloff_order", o.rolloff_order);
        s->get("theta_bound", o.theta_bound);
        s->get("max_bisection", o.max_bisection);
        s->get("lti", c.lti);
        s->finish();
    }
    if (auto s = root.sub("analysis")) {
        s->get("gamma", c.analysis_gamma);
        s->get("multiplier_pole", c.multiplier.pole);
        s->get("multiplier_order", c.multiplier.order);
        s->get("coefficient_bound", c.multiplier.coefficient_bound);
        s->get("allow_fit", c.multiplier.allow_fit);
        s->finish();
    }
    if (auto s = root.sub("scenario")) {
        ScenarioOptions& o = c.scenario;
        s->get("duration_s", o.duration_s);
        s->get("reference_hz", o.reference_hz);
        s->get("reference_amplitude", o.reference_amplitude);
        s->get("scheduling_hz", o.scheduling_hz);
        s->get("scheduling_center", o.scheduling_center);
        s->get("scheduling_amplitude", o.scheduling_amplitude);
        s->get("filter_order", o.filter_order);
        s->get("filter_cutoff_hz", o.filter_cutoff_hz);
        s->get("disturbance_std", o.disturbance_std);
        s->get("frozen", c.frozen);
        s->finish();
    }
    root.finish();
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    try {
        return parse_config(text);
    } catch (const Error& e) {
        fail(e.kind(), path + ": " + e.what());
    }
}

void apply_paper_scale(PipelineConfig& config) {
    config.paper_scale = true;
    config.experiment.n_samples = 240000;
    config.frequencies = 1000;
}

std::string config_to_json(const PipelineConfig& c) {
    json weights = {
        {"bandwidth_hz", c.weight_defaults.bandwidth_hz},
        {"peak_sensitivity", c.weight_defaults.peak_sensitivity},
        {"integrator_leak", c.weight_defaults.integrator_leak},
        {"process_gain", c.weight_defaults.process_gain},
        {"control_gain", c.weight_defaults.control_gain},
        {"rolloff_hz", c.weight_defaults.rolloff_hz},
        {"rolloff_lf_gain", c.weight_defaults.rolloff_lf_gain},
        {"rolloff_hf_gain", c.weight_defaults.rolloff_hf_gain},
    };
    for (Channel ch : kChannels)
        if (const auto& tf = c.weight_tf[static_cast<size_t>(ch)])
            weights[channel_name(ch)] = coeffs_json(*tf);
    json doc = {
        {"version", c.version},
        {"seed", c.seed},
        {"plant", {{"kind", c.plant == PlantKind::Surrogate ? "surrogate" : "dataset"}, {"model", c.model_path}}},
        {"paths",
         {{"output_dir", c.paths.output_dir},
          {"records_dir", c.records_dir()},
          {"dataset", c.dataset_path()},
          {"result", c.result_path()},
          {"controller", c.controller_path()},
          {"certificate", c.certificate_path()},
          {"report_dir", c.report_dir()}}},
        {"experiment",
         {{"points", c.points},
          {"samples", c.experiment.n_samples},
          {"excitation_std", c.experiment.excitation_std},
          {"noise_std", c.experiment.noise_std},
          {"warmup", c.experiment.warmup}}},
        {"estimation",
         {{"frequencies", c.frequencies},
          {"window", c.window == Window::Hann ? "hann" : "rectangular"},
          {"segments", c.segments},
          {"project_bezout", c.project_bezout}}},
        {"controller0", {{"num", c.controller0_num}, {"den", c.controller0_den}}},
        {"obf", {{"pole", c.obf_pole}, {"order_n", c.order_n}, {"order_d", c.order_d}}},
        {"scheduling", {{"kind", scheduling_kind_name(c.scheduling)}, {"degree", c.scheduling_degree}}},
        {"weights", weights},
        {"synthesis",
         {{"epsilon", c.synthesis.epsilon},
          {"gamma_lo", c.synthesis.gamma_lo},
          {"gamma_hi", c.synthesis.gamma_hi},
          {"rel_tolerance", c.synthesis.rel_tolerance},
          {"abs_tolerance", c.synthesis.abs_tolerance},
          {"integral_action", c.synthesis.integral_action},
          {"rolloff_order", c.synthesis.rolloff_order},
          {"theta_bound", c.synthesis.theta_bound},
          {"max_bisection", c.synthesis.max_bisection},
          {"lti", c.lti}}},
        {"analysis",
         {{"gamma", c.analysis_gamma ? json(*c.analysis_gamma) : json(nullptr)},
          {"multiplier_pole", c.multiplier.pole},
          {"multiplier_order", c.multiplier.order},
          {"coefficient_bound", c.multiplier.coefficient_bound},
          {"allow_fit", c.multiplier.allow_fit}}},
        {"scenario",
         {{"duration_s", c.scenario.duration_s},
          {"reference_hz", c.scenario.reference_hz},
          {"reference_amplitude", c.scenario.reference_amplitude},
          {"scheduling_hz", c.scenario.scheduling_hz},
          {"scheduling_center", c.scenario.scheduling_center},
          {"scheduling_amplitude", c.scenario.scheduling_amplitude},
          {"filter_order", c.scenario.filter_order},
          {"filter_cutoff_hz", c.scenario.filter_cutoff_hz},
          {"disturbance_std", c.scenario.disturbance_std},
          {"frozen", c.frozen}}},
    };
    return doc.dump(2) + "\n";
}

} // namespace fdlpv::cli
