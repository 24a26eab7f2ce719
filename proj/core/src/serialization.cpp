#include "fdlpv/serialization.hpp"

#include "fdlpv/error.hpp"
#include "fdlpv/io_util.hpp"

#include <json.hpp>

namespace fdlpv {

using nlohmann::json;

namespace {

json poles_json(const ObfBasis& b) {
    json arr = json::array();
    for (Complex p : b.poles())
        arr.push_back(json::array({p.real(), p.imag()}));
    return arr;
}

ObfBasis poles_from(const json& j) {
    std::vector<Complex> poles;
    for (const json& p : j) {
        if (p.is_number())
            poles.emplace_back(p.get<double>(), 0.0);
        else
            poles.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    return ObfBasis(std::move(poles));
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        fail(ErrorKind::Parse, std::string("controller field '") + what + "' has the wrong number of rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& r = j[static_cast<size_t>(i)];
        if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
            fail(ErrorKind::Parse, std::string("controller field '") + what + "' has the wrong number of columns");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = r[static_cast<size_t>(c)].get<double>();
    }
    return m;
}

json controller_json(const ControllerParameters& t) {
    json j;
    j["format"] = "fdlpv-controller";
    j["version"] = 1;
    j["sample_rate"] = t.sample_rate;
    j["basis_n"] = {{"poles", poles_json(t.basis_n)}};
    j["basis_d"] = {{"poles", poles_json(t.basis_d)}};
    j["scheduling"] = {{"kind", scheduling_kind_name(t.scheduling.kind())},
                       {"degree", t.scheduling.degree()},
                       {"range", json::array({t.scheduling.lo(), t.scheduling.hi()})}};
    j["w"] = matrix_json(t.w);
    j["v"] = matrix_json(t.v);
    return j;
}

ControllerParameters controller_from(const json& j) {
    const json& s = j.at("scheduling");
    const SchedulingBasis sched(parse_scheduling_kind(s.at("kind").get<std::string>()), s.at("degree").get<int>(),
                                s.at("range").at(0).get<double>(), s.at("range").at(1).get<double>());
    ControllerParameters t = ControllerParameters::normalized(
        poles_from(j.at("basis_n").at("poles")), poles_from(j.at("basis_d").at("poles")), sched,
        j.at("sample_rate").get<double>());
    t.w = matrix_from(j.at("w"), t.w.rows(), t.w.cols(), "w");
    t.v = matrix_from(j.at("v"), t.v.rows(), t.v.cols(), "v");
    t.validate();
    return t;
}

template <class F>
auto parse_guard(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
    }
}

} // namespace

std::string controller_to_json(const ControllerParameters& theta) { return controller_json(theta).dump(2) + "\n"; }

ControllerParameters controller_from_json(const std::string& text) {
    return parse_guard([&] { return controller_from(json::parse(text)); });
}

void save_controller(const ControllerParameters& theta, const std::string& path) {
    write_file_atomic(path, controller_to_json(theta));
}

ControllerParameters load_controller(const std::string& path) {
    try {
        return controller_from_json(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io)
            throw;
        throw Error(e.kind(), path + ": " + e.what());
    }
}

std::string synthesis_result_to_json(const SynthesisResult& r, const SynthesisProblem& problem) {
    json j;
    j["format"] = "fdlpv-synthesis";
    j["status"] = r.status;
    j["gamma"] = r.gamma;
    j["achieved_gamma"] = r.achieved_gamma;
    j["epsilon"] = r.epsilon;
    j["min_re_dp"] = r.min_re_dp;
    j["min_margin"] = r.min_margin;
    j["iterations"] = r.iterations;
    json steps = json::array();
    for (const BisectionStep& s : r.steps)
        steps.push_back({{"gamma", s.gamma}, {"feasible", s.feasible}, {"newton_iterations", s.newton_iterations}});
    j["steps"] = std::move(steps);
    j["controller"] = controller_json(r.theta);

    const FrequencyGrid& g = *problem.grid;
    const size_t n = g.size();
    json margins;
    json ps = json::array();
    json ws = json::array();
    std::array<json, 4> ch{json::array(), json::array(), json::array(), json::array()};
    for (Eigen::Index row = 0; row < r.margins.rows(); ++row) {
        const auto tau = static_cast<size_t>(row) / n;
        const auto k = static_cast<size_t>(row) % n;
        ps.push_back(problem.scheduling[tau]);
        ws.push_back(g[k]);
        for (size_t c = 0; c < 4; ++c)
            ch[c].push_back(r.margins(row, static_cast<Eigen::Index>(c)));
    }
    margins["p"] = std::move(ps);
    margins["omega"] = std::move(ws);
    for (Channel c : kChannels)
        margins[channel_name(c)] = std::move(ch[static_cast<size_t>(c)]);
    j["margins"] = std::move(margins);
    return j.dump(2) + "\n";
}

StoredResult synthesis_result_from_json(const std::string& text) {
    return parse_guard([&] {
        const json j = json::parse(text);
        StoredResult s;
        if (j.contains("controller")) {
            s.theta = controller_from(j.at("controller"));
            s.gamma = j.at("gamma").get<double>();
            s.epsilon = j.at("epsilon").get<double>();
        } else {
            s.theta = controller_from(j);
        }
        return s;
    });
}

std::string certificate_to_json(const Certificate& cert) {
    json j;
    j["format"] = "fdlpv-certificate";
    j["status"] = to_string(cert.status);
    j["epsilon"] = cert.epsilon;
    j["gamma"] = cert.gamma ? json(*cert.gamma) : json(nullptr);
    j["grid"] = {{"size", cert.grid_size}, {"omega_min", cert.omega_min}, {"omega_max", cert.omega_max}};
    j["multiplier_basis"] = {{"pole", cert.multiplier.pole}, {"order", cert.multiplier.order}};
    j["min_margin"] = cert.points.empty() ? json(nullptr) : json(cert.min_margin());
    j["reason"] = cert.reason;
    json pts = json::array();
    for (const PointCertificate& pc : cert.points) {
        json e;
        e["p"] = pc.p;
        e["status"] = to_string(pc.status);
        e["min_margin"] = pc.min_margin;
        e["multiplier"] = pc.multiplier;
        json coef = json::array();
        for (Eigen::Index i = 0; i < pc.coefficients.size(); ++i)
            coef.push_back(pc.coefficients(i));
        e["coefficients"] = std::move(coef);
        if (pc.base)
            e["base"] = json::parse(rational_to_json(*pc.base));
        e["margins"] = pc.margins;
        e["reason"] = pc.reason;
        pts.push_back(std::move(e));
    }
    j["points"] = std::move(pts);
    return j.dump(2) + "\n";
}

std::string metrics_to_json(const StepMetrics& m) {
    json j;
    j["l2_error"] = m.l2_error;
    j["linf_error"] = m.linf_error;
    j["overshoot_pct"] = m.overshoot_pct;
    j["settling_s"] = m.settling_s;
    return j.dump(2) + "\n";
}

std::string rational_to_json(const RationalTf& tf) {
    json j;
    j["num"] = tf.num().descending();
    j["den"] = tf.den().descending();
    return j.dump();
}

RationalTf rational_from_json(const std::string& text, double sample_rate) {
    return parse_guard([&] {
        const json j = json::parse(text);
        const auto num = j.at("num").get<std::vector<double>>();
        const auto den = j.at("den").get<std::vector<double>>();
        return RationalTf::from_descending(num, den, sample_rate);
    });
}

} // namespace fdlpv
