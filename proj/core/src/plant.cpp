#include "fdlpv/plant.hpp"

#include "fdlpv/analysis.hpp"
#include "fdlpv/error.hpp"
#include "fdlpv/io_util.hpp"

#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace fdlpv {

LpvSurrogateModel build_surrogate(const SurrogateConstants& k, std::string version) {
    require(k.sample_rate > 0.0, ErrorKind::Config, "surrogate sample_rate must be positive");
    require(k.p_min < k.p_max, ErrorKind::Config, "surrogate scheduling range is empty");
    const double ts = 1.0 / k.sample_rate;
    LpvSurrogateModel m;
    m.a0 = Eigen::MatrixXd::Identity(3, 3);
    m.a0(0, 0) += ts * k.lambda0;
    m.a0(0, 2) += ts;
    m.a0(1, 1) -= ts * k.damping;
    m.a0(1, 2) += ts * k.coupling * k.p_offset;
    m.a0(2, 2) -= ts * k.damping;
    m.a1 = Eigen::MatrixXd::Zero(3, 3);
    m.a1(1, 2) = -ts * k.coupling;
    m.a1(2, 1) = ts * k.coupling_back;
    m.b = Eigen::VectorXd::Zero(3);
    m.b(1) = ts * k.input_gain;
    m.c = Eigen::RowVectorXd::Zero(3);
    m.c(0) = 1.0;
    m.sample_rate = k.sample_rate;
    m.p_min = k.p_min;
    m.p_max = k.p_max;
    m.version = std::move(version);
    m.validate();
    return m;
}

LpvSurrogateModel LpvSurrogateModel::surrogate_v1() { return build_surrogate(SurrogateConstants{}); }

LpvSurrogateModel LpvSurrogateModel::load(const std::string& path) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, path + ": " + e.what());
    }
    SurrogateConstants k;
    std::string version = "surrogate_v1";
    try {
        if (doc.contains("discretization") && doc.at("discretization").get<std::string>() != "forward_euler")
            fail(ErrorKind::Config, path + ": only forward_euler discretization is supported");
        version = doc.value("version", version);
        k.sample_rate = doc.value("sample_rate", k.sample_rate);
        k.lambda0 = doc.value("lambda0", k.lambda0);
        k.damping = doc.value("damping", k.damping);
        k.coupling = doc.value("coupling", k.coupling);
        k.coupling_back = doc.value("coupling_back", k.coupling_back);
        k.input_gain = doc.value("input_gain", k.input_gain);
        k.p_offset = doc.value("p_offset", k.p_offset);
        if (doc.contains("range")) {
            k.p_min = doc.at("range").at(0).get<double>();
            k.p_max = doc.at("range").at(1).get<double>();
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, path + ": " + e.what());
    }
    return build_surrogate(k, version);
}

Eigen::MatrixXd LpvSurrogateModel::a(double p) const { return a0 + p * a1; }

void LpvSurrogateModel::validate() const {
    const auto n = a0.rows();
    require(n > 0 && a0.cols() == n && a1.rows() == n && a1.cols() == n && b.size() == n && c.size() == n,
            ErrorKind::Config, "surrogate matrices have inconsistent dimensions");
    require(sample_rate > 0.0 && p_min < p_max, ErrorKind::Config, "surrogate rate or range invalid");
}

namespace {

void require_range(const LpvSurrogateModel& m, double p) {
    if (!m.in_range(p)) {
        std::ostringstream os;
        os << "scheduling value " << p << " outside [" << m.p_min << ", " << m.p_max << "]";
        fail(ErrorKind::OutOfRange, os.str());
    }
}

} // namespace

namespace {

// Faddeev-LeVerrier on m: c m adj(wI - m) b and det(wI - m), ascending powers of w.
std::pair<Polynomial, Polynomial> char_poly_tf(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                                               const Eigen::RowVectorXd& c) {
    const int n = static_cast<int>(m.rows());
    std::vector<double> den(static_cast<size_t>(n) + 1, 0.0);
    std::vector<double> num(static_cast<size_t>(n), 0.0);
    den[static_cast<size_t>(n)] = 1.0;
    Eigen::MatrixXd mk = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        num[static_cast<size_t>(n - k)] = c * mk * b;
        const Eigen::MatrixXd am = m * mk;
        const double ck = -am.trace() / k;
        den[static_cast<size_t>(n - k)] = ck;
        mk = am + ck * Eigen::MatrixXd::Identity(n, n);
    }
    return {Polynomial(std::move(num)), Polynomial(std::move(den))};
}

} // namespace

RationalTf frozen_tf(const LpvSurrogateModel& model, double p) {
    require_range(model, p);
    auto [num, den] = char_poly_tf(model.a(p), model.b, model.c);
    return {std::move(num), std::move(den), model.sample_rate};
}

FrfResponse frozen_frf(const LpvSurrogateModel& model, double p, const FrequencyGrid& grid) {
    require_range(model, p);
    // poles cluster near z = 1, so expand around it: w = z - 1
    const int n = model.states();
    const Eigen::MatrixXd shifted = model.a(p) - Eigen::MatrixXd::Identity(n, n);
    const auto [num, den] = char_poly_tf(shifted, model.b, model.c);
    std::vector<Complex> v(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        const double h = 0.5 * grid[k];
        const Complex w(-2.0 * std::sin(h) * std::sin(h), std::sin(grid[k]));
        v[k] = num(w) / den(w);
    }
    return {std::move(v), make_grid(grid)};
}

FrfResponse resolvent_frf(const LpvSurrogateModel& model, double p, const FrequencyGrid& grid) {
    require_range(model, p);
    const Eigen::MatrixXcd a = model.a(p).cast<Complex>();
    const Eigen::VectorXcd b = model.b.cast<Complex>();
    const Eigen::RowVectorXcd c = model.c.cast<Complex>();
    const auto n = a.rows();
    std::vector<Complex> v(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        const Complex z = std::polar(1.0, grid[k]);
        const Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - a;
        v[k] = (c * m.partialPivLu().solve(b))(0);
    }
    return {std::move(v), make_grid(grid)};
}

TimeRecord simulate_lpv(const LpvSurrogateModel& model, const TimeRecord& input, const TimeRecord& scheduling) {
    require(input.size() == scheduling.size(), ErrorKind::InvalidArgument,
            "input and scheduling records differ in length");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.states());
    std::vector<double> y(input.size());
    for (size_t k = 0; k < input.size(); ++k) {
        const double p = scheduling.samples[k];
        if (!model.in_range(p)) {
            std::ostringstream os;
            os << "scheduling leaves [" << model.p_min << ", " << model.p_max << "] at sample " << k << " (p = " << p
               << ")";
            fail(ErrorKind::OutOfRange, os.str());
        }
        y[k] = model.c.dot(x);
        x = model.a0 * x + p * (model.a1 * x) + model.b * input.samples[k];
    }
    return {std::move(y), input.sample_rate, "y"};
}

Experiment generate_experiment(const LpvSurrogateModel& model, const RationalTf& controller0, double p,
                               const ExperimentOptions& options) {
    require_range(model, p);
    require(options.n_samples > 0, ErrorKind::InvalidArgument, "experiment needs at least one sample");
    require(options.excitation_std >= 0.0 && options.noise_std >= 0.0, ErrorKind::InvalidArgument,
            "noise levels must be non-negative");
    const RationalTf g = frozen_tf(model, p);
    if (!oracle_stability(g, controller0)) {
        std::ostringstream os;
        os << "initial controller does not stabilize the frozen plant at p = " << p;
        fail(ErrorKind::Unstable, os.str());
    }
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TfFilter k0(controller0);
    const Eigen::MatrixXd a = model.a(p);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.states());
    const size_t total = options.warmup + options.n_samples;
    Experiment out;
    out.d = TimeRecord({}, model.sample_rate, "d");
    out.u_g = TimeRecord({}, model.sample_rate, "u_G");
    out.y = TimeRecord({}, model.sample_rate, "y");
    for (TimeRecord* r : {&out.d, &out.u_g, &out.y})
        r->samples.reserve(options.n_samples);
    for (size_t k = 0; k < total; ++k) {
        const double dk = options.excitation_std > 0.0 ? options.excitation_std * gauss(rng) : 0.0;
        const double nk = options.noise_std > 0.0 ? options.noise_std * gauss(rng) : 0.0;
        const double yk = model.c.dot(x);
        const double uk = k0.step(-(yk + nk)) + dk;
        if (k >= options.warmup) {
            out.d.samples.push_back(dk);
            out.u_g.samples.push_back(uk);
            out.y.samples.push_back(yk + nk);
        }
        x = a * x + model.b * uk;
        require(std::isfinite(x.squaredNorm()), ErrorKind::Numerical,
                "experiment diverged at sample " + std::to_string(k));
    }
    return out;
}

void Trace::resize(size_t n) {
    for (std::vector<double>* v : {&r, &e, &u, &d, &y, &p})
        v->assign(n, 0.0);
}

std::string Trace::to_csv() const {
    std::ostringstream os;
    os << "t,r,e,u,d,y,p\n";
    for (size_t k = 0; k < size(); ++k)
        os << format_double(static_cast<double>(k) / sample_rate) << ',' << format_double(r[k]) << ','
           << format_double(e[k]) << ',' << format_double(u[k]) << ',' << format_double(d[k]) << ','
           << format_double(y[k]) << ',' << format_double(p[k]) << '\n';
    return os.str();
}

} // namespace fdlpv
