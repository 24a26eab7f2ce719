#include "fdlpv/frf.hpp"

#include "fdlpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fdlpv {

FrequencyGrid::FrequencyGrid(std::vector<double> omegas, double sample_rate)
    : omegas_(std::move(omegas)), fs_(sample_rate) {
    require(!omegas_.empty(), ErrorKind::InvalidArgument, "frequency grid is empty");
    require(fs_ > 0.0, ErrorKind::InvalidArgument, "sample rate must be positive");
    for (size_t k = 0; k < omegas_.size(); ++k) {
        const double w = omegas_[k];
        require(std::isfinite(w) && w >= 0.0 && w <= std::numbers::pi, ErrorKind::InvalidArgument,
                "frequency " + std::to_string(w) + " outside [0, pi] rad/sample");
        if (k > 0)
            require(w > omegas_[k - 1], ErrorKind::InvalidArgument,
                    "frequencies not strictly increasing at index " + std::to_string(k));
    }
}

FrequencyGrid FrequencyGrid::linear(double omega_min, double omega_max, size_t n, double sample_rate) {
    require(n >= 1, ErrorKind::InvalidArgument, "grid needs at least one point");
    std::vector<double> w(n);
    for (size_t k = 0; k < n; ++k)
        w[k] = n == 1 ? omega_min : omega_min + (omega_max - omega_min) * static_cast<double>(k) / static_cast<double>(n - 1);
    return {std::move(w), sample_rate};
}

FrequencyGrid FrequencyGrid::logarithmic(double omega_min, double omega_max, size_t n, double sample_rate) {
    require(n >= 1, ErrorKind::InvalidArgument, "grid needs at least one point");
    require(omega_min > 0.0 && omega_max >= omega_min, ErrorKind::InvalidArgument,
            "logarithmic grid needs 0 < omega_min <= omega_max");
    std::vector<double> w(n);
    const double a = std::log(omega_min);
    const double b = std::log(omega_max);
    for (size_t k = 0; k < n; ++k)
        w[k] = n == 1 ? omega_min : std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
    w.back() = std::min(w.back(), std::numbers::pi);
    return {std::move(w), sample_rate};
}

double FrequencyGrid::hz(size_t k) const noexcept { return omegas_[k] * fs_ / (2.0 * std::numbers::pi); }

std::vector<Complex> FrequencyGrid::unit_circle_points() const {
    std::vector<Complex> z(omegas_.size());
    std::transform(omegas_.begin(), omegas_.end(), z.begin(), [](double w) { return std::polar(1.0, w); });
    return z;
}

SchedulingGrid::SchedulingGrid(std::vector<double> points, double lo, double hi)
    : points_(std::move(points)), lo_(lo), hi_(hi) {
    require(!points_.empty(), ErrorKind::InvalidArgument, "scheduling grid is empty");
    require(lo_ <= hi_, ErrorKind::InvalidArgument, "scheduling range is inverted");
    for (size_t i = 0; i < points_.size(); ++i) {
        require(points_[i] >= lo_ && points_[i] <= hi_, ErrorKind::OutOfRange,
                "operating point " + std::to_string(points_[i]) + " outside the scheduling range");
        for (size_t j = 0; j < i; ++j)
            require(points_[i] != points_[j], ErrorKind::InvalidArgument, "operating points must be distinct");
    }
}

FrfResponse::FrfResponse(std::vector<Complex> values, GridPtr grid) : values_(std::move(values)), grid_(std::move(grid)) {
    require(grid_ != nullptr, ErrorKind::InvalidArgument, "response needs a grid");
    require(values_.size() == grid_->size(), ErrorKind::GridMismatch,
            "response length " + std::to_string(values_.size()) + " differs from grid length " +
                std::to_string(grid_->size()));
    for (const Complex& v : values_)
        require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorKind::Numerical,
                "response contains non-finite values");
}

bool FrfResponse::same_grid(const FrfResponse& other) const noexcept {
    return grid_ == other.grid_ || *grid_ == *other.grid_;
}

namespace {

template <typename Op>
FrfResponse zip(const FrfResponse& a, const FrfResponse& b, Op op) {
    require(a.same_grid(b), ErrorKind::GridMismatch, "responses live on different grids");
    std::vector<Complex> out(a.size());
    for (size_t k = 0; k < a.size(); ++k)
        out[k] = op(a[k], b[k]);
    return {std::move(out), a.grid_ptr()};
}

} // namespace

FrfResponse operator*(const FrfResponse& a, const FrfResponse& b) {
    return zip(a, b, [](Complex x, Complex y) { return x * y; });
}
FrfResponse operator/(const FrfResponse& a, const FrfResponse& b) {
    return zip(a, b, [](Complex x, Complex y) { return x / y; });
}
FrfResponse operator+(const FrfResponse& a, const FrfResponse& b) {
    return zip(a, b, [](Complex x, Complex y) { return x + y; });
}
FrfResponse operator-(const FrfResponse& a, const FrfResponse& b) {
    return zip(a, b, [](Complex x, Complex y) { return x - y; });
}
FrfResponse operator*(Complex s, const FrfResponse& a) {
    std::vector<Complex> out(a.values());
    for (Complex& v : out)
        v *= s;
    return {std::move(out), a.grid_ptr()};
}

FrfDataset::FrfDataset(GridPtr grid, SchedulingGrid scheduling, std::vector<std::string> channels)
    : grid_(std::move(grid)), scheduling_(std::move(scheduling)), channels_(std::move(channels)) {
    require(grid_ != nullptr, ErrorKind::InvalidArgument, "dataset needs a grid");
    require(!channels_.empty(), ErrorKind::InvalidArgument, "dataset declares no channels");
}

void FrfDataset::set(double p, const std::string& channel, FrfResponse response) {
    require(std::find(channels_.begin(), channels_.end(), channel) != channels_.end(), ErrorKind::InvalidArgument,
            "undeclared channel '" + channel + "'");
    require(std::find(scheduling_.points().begin(), scheduling_.points().end(), p) != scheduling_.points().end(),
            ErrorKind::InvalidArgument, "operating point " + std::to_string(p) + " not in the scheduling grid");
    require(*grid_ == response.grid(), ErrorKind::GridMismatch, "response grid differs from dataset grid");
    FrfResponse shared(response.values(), grid_);
    entries_.insert_or_assign({p, channel}, std::move(shared));
}

const FrfResponse& FrfDataset::at(double p, const std::string& channel) const {
    auto it = entries_.find({p, channel});
    if (it == entries_.end()) {
        std::ostringstream os;
        os << "dataset has no entry for channel '" << channel << "' at p = " << p;
        fail(ErrorKind::InvalidArgument, os.str());
    }
    return it->second;
}

bool FrfDataset::has(double p, const std::string& channel) const { return entries_.count({p, channel}) > 0; }

void FrfDataset::validate() const {
    for (double p : scheduling_.points())
        for (const std::string& ch : channels_) {
            if (!has(p, ch)) {
                std::ostringstream os;
                os << "dataset is missing channel '" << ch << "' at p = " << p;
                fail(ErrorKind::InvalidArgument, os.str());
            }
        }
}

TimeRecord::TimeRecord(std::vector<double> s, double fs, std::string name)
    : samples(std::move(s)), sample_rate(fs), label(std::move(name)) {
    require(sample_rate > 0.0, ErrorKind::InvalidArgument, "sample rate must be positive");
    for (double v : samples)
        require(std::isfinite(v), ErrorKind::Numerical, "time record '" + label + "' has non-finite samples");
}

} // namespace fdlpv
