#include "fdlpv/weights.hpp"

#include "fdlpv/error.hpp"

#include <cmath>
#include <numbers>

namespace fdlpv {

Weight::Weight(RationalTf tf) : tf_(std::move(tf)) {
    if (!tf_->is_stable()) {
        const RationalTf reduced = tf_->minimal();
        require(reduced.is_stable(), ErrorKind::Config, "weighting filter must be stable");
    }
}

Weight::Weight(FrfResponse table) : table_(std::move(table)) {}

const RationalTf& Weight::tf() const {
    require(tf_.has_value(), ErrorKind::InvalidArgument, "weight is tabulated, not rational");
    return *tf_;
}

const FrfResponse& Weight::table() const {
    require(table_.has_value(), ErrorKind::InvalidArgument, "weight is rational, not tabulated");
    return *table_;
}

bool Weight::is_zero() const {
    if (tf_)
        return tf_->num().is_zero() || (tf_->num().degree() == 0 && tf_->num()[0] == 0.0);
    for (const Complex& v : table_->values())
        if (v != Complex{})
            return false;
    return true;
}

std::vector<Complex> Weight::evaluate(const FrequencyGrid& grid) const {
    if (tf_)
        return tf_->frf(grid).values();
    require(table_->grid() == grid, ErrorKind::GridMismatch, "tabulated weight lives on a different grid");
    return table_->values();
}

Weight Weight::scaled(double k) const {
    if (tf_)
        return Weight(k * *tf_);
    return Weight(Complex(k) * *table_);
}

WeightSet WeightSet::scaled(double k) const {
    WeightSet out;
    for (size_t i = 0; i < w.size(); ++i)
        out.w[i] = w[i].scaled(k);
    return out;
}

void WeightSet::validate() const {
    bool any = false;
    for (const Weight& x : w)
        any = any || !x.is_zero();
    require(any, ErrorKind::Config, "all four channel weights are zero");
}

WeightSet default_weights(const DefaultWeightOptions& o) {
    require(o.bandwidth_hz > 0.0 && o.rolloff_hz > 0.0 && o.peak_sensitivity > 0.0 && o.integrator_leak > 0.0 &&
                o.rolloff_lf_gain > 0.0 && o.rolloff_hf_gain > 0.0,
            ErrorKind::Config, "weight shaping parameters must be positive");
    const double wb = 2.0 * std::numbers::pi * o.bandwidth_hz;
    const double wt = 2.0 * std::numbers::pi * o.rolloff_hz;
    const std::array<double, 2> ws_num{1.0 / o.peak_sensitivity, wb};
    const std::array<double, 2> ws_den{1.0, o.integrator_leak * wb};
    const std::array<double, 2> wt_num{1.0, wt};
    const std::array<double, 2> wt_den{1.0 / o.rolloff_hf_gain, wt / o.rolloff_lf_gain};
    WeightSet out;
    out[Channel::S] = Weight(bilinear(ws_num, ws_den, o.sample_rate));
    out[Channel::SG] = Weight::constant(o.process_gain, o.sample_rate);
    out[Channel::KS] = Weight::constant(o.control_gain, o.sample_rate);
    out[Channel::T] = Weight(bilinear(wt_num, wt_den, o.sample_rate));
    return out;
}

} // namespace fdlpv
