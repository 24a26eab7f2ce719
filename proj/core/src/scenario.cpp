#include "fdlpv/scenario.hpp"

#include "fdlpv/error.hpp"
#include "fdlpv/rational.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fdlpv {

std::vector<double> square_wave(size_t n, double sample_rate, double frequency_hz, double amplitude) {
    require(sample_rate > 0.0 && frequency_hz > 0.0, ErrorKind::InvalidArgument,
            "square wave needs positive sample rate and frequency");
    std::vector<double> out(n);
    for (size_t k = 0; k < n; ++k) {
        const double phase = std::fmod(static_cast<double>(k) * frequency_hz / sample_rate, 1.0);
        out[k] = phase < 0.5 ? amplitude : -amplitude;
    }
    return out;
}

std::vector<double> lowpass(const std::vector<double>& x, int order, double cutoff_hz, double sample_rate) {
    TfFilter f(butterworth_lowpass(order, cutoff_hz, sample_rate));
    std::vector<double> y(x.size());
    for (size_t k = 0; k < x.size(); ++k)
        y[k] = f.step(x[k]);
    return y;
}

std::vector<double> clip(std::vector<double> x, double lo, double hi) {
    for (double& v : x)
        v = std::clamp(v, lo, hi);
    return x;
}

Scenario make_scenario(const ScenarioOptions& o, std::optional<double> frozen_p) {
    require(o.duration_s > 0.0, ErrorKind::Config, "scenario duration must be positive");
    require(o.p_min < o.p_max, ErrorKind::Config, "scenario range must satisfy p_min < p_max");
    const auto n = static_cast<size_t>(std::llround(o.duration_s * o.sample_rate));
    Scenario s;
    s.reference = TimeRecord(
        lowpass(square_wave(n, o.sample_rate, o.reference_hz, o.reference_amplitude), o.filter_order,
                o.filter_cutoff_hz, o.sample_rate),
        o.sample_rate, "r");
    std::vector<double> p;
    if (frozen_p) {
        require(*frozen_p >= o.p_min && *frozen_p <= o.p_max, ErrorKind::OutOfRange,
                "frozen scheduling value outside the range");
        p.assign(n, *frozen_p);
    } else {
        std::vector<double> sq = square_wave(n, o.sample_rate, o.scheduling_hz, o.scheduling_amplitude);
        std::vector<double> smooth = lowpass(sq, o.filter_order, o.filter_cutoff_hz, o.sample_rate);
        p.resize(n);
        for (size_t k = 0; k < n; ++k)
            p[k] = o.scheduling_center + smooth[k];
        p = clip(std::move(p), o.p_min, o.p_max);
    }
    s.scheduling = TimeRecord(std::move(p), o.sample_rate, "p");
    std::vector<double> d(n, 0.0);
    if (o.disturbance_std > 0.0) {
        std::mt19937_64 rng(o.seed);
        std::normal_distribution<double> nd(0.0, o.disturbance_std);
        for (double& v : d)
            v = nd(rng);
    }
    s.disturbance = TimeRecord(std::move(d), o.sample_rate, "d");
    return s;
}

} // namespace fdlpv
