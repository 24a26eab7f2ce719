#include "fdlpv/etfe.hpp"

#include "fdlpv/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fdlpv {

Window parse_window(const std::string& name) {
    if (name == "hann" || name == "hanning")
        return Window::Hann;
    if (name == "rectangular" || name == "rect" || name == "none")
        return Window::Rectangular;
    fail(ErrorKind::Config, "unknown window '" + name + "' (expected hann or rectangular)");
}

namespace {

std::vector<double> make_window(Window w, size_t len) {
    std::vector<double> out(len, 1.0);
    if (w == Window::Hann && len > 1)
        for (size_t n = 0; n < len; ++n)
            out[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(len));
    return out;
}

} // namespace

FrfResponse etfe_estimate(const TimeRecord& input, const TimeRecord& output, const FrequencyGrid& grid, Window window,
                          int segments) {
    require(segments >= 1, ErrorKind::InvalidArgument, "segments must be positive");
    require(input.size() == output.size(), ErrorKind::InvalidArgument, "input and output records differ in length");
    require(input.sample_rate == output.sample_rate, ErrorKind::InvalidArgument,
            "input and output records differ in sample rate");
    const size_t n = input.size();
    const auto segs = static_cast<size_t>(segments);
    require(n > 0 && n % segs == 0, ErrorKind::InvalidArgument,
            "record length " + std::to_string(n) + " not divisible by " + std::to_string(segments) + " segments");
    const size_t len = n / segs;
    require(len >= 2, ErrorKind::InvalidArgument, "segments shorter than two samples");
    const size_t hop = segs == 1 ? len : len / 2;
    const size_t count = segs == 1 ? 1 : (n - len) / hop + 1;

    const std::vector<double> win = make_window(window, len);
    const size_t nbins = len / 2 + 1;
    std::vector<Complex> sxy(nbins, Complex{});
    std::vector<double> sxx(nbins, 0.0);

    Eigen::FFT<double> fft;
    std::vector<double> xs(len);
    std::vector<double> ys(len);
    std::vector<Complex> xf;
    std::vector<Complex> yf;
    for (size_t s = 0; s < count; ++s) {
        const size_t off = s * hop;
        for (size_t k = 0; k < len; ++k) {
            xs[k] = win[k] * input.samples[off + k];
            ys[k] = win[k] * output.samples[off + k];
        }
        fft.fwd(xf, xs);
        fft.fwd(yf, ys);
        for (size_t j = 0; j < nbins; ++j) {
            sxy[j] += yf[j] * std::conj(xf[j]);
            sxx[j] += std::norm(xf[j]);
        }
    }

    const double peak = *std::max_element(sxx.begin(), sxx.end());
    const double floor = peak * 1e-14;
    const double bin_width = 2.0 * std::numbers::pi / static_cast<double>(len);
    const double top = bin_width * static_cast<double>(nbins - 1);
    std::vector<Complex> values(grid.size());
    std::ostringstream missing;
    size_t n_missing = 0;
    for (size_t k = 0; k < grid.size(); ++k) {
        const double w = grid[k];
        require(w <= top * (1.0 + 1e-12), ErrorKind::OutOfRange,
                "grid frequency " + std::to_string(w) + " beyond the highest DFT bin " + std::to_string(top));
        const double x = std::min(w / bin_width, static_cast<double>(nbins - 1));
        auto j0 = static_cast<size_t>(std::floor(x));
        if (j0 >= nbins - 1)
            j0 = nbins - 2;
        const double frac = x - static_cast<double>(j0);
        const bool need0 = frac < 1.0 - 1e-12;
        const bool need1 = frac > 1e-12;
        if ((need0 && sxx[j0] <= floor) || (need1 && sxx[j0 + 1] <= floor)) {
            if (n_missing++ < 8)
                missing << (n_missing > 1 ? ", " : "") << w;
            continue;
        }
        const Complex h0 = need0 ? sxy[j0] / sxx[j0] : Complex{};
        const Complex h1 = need1 ? sxy[j0 + 1] / sxx[j0 + 1] : Complex{};
        values[k] = (1.0 - frac) * h0 + frac * h1;
        if (!need0)
            values[k] = h1;
        if (!need1)
            values[k] = h0;
    }
    if (n_missing > 0)
        fail(ErrorKind::Excitation, "zero input auto-spectrum at " + std::to_string(n_missing) +
                                        " frequencies (rad/sample): " + missing.str() + (n_missing > 8 ? ", ..." : ""));
    return {std::move(values), make_grid(grid)};
}

FrfResponse closed_loop_to_plant(const FrfResponse& sens, const FrfResponse& proc_sens, double threshold) {
    require(sens.same_grid(proc_sens), ErrorKind::GridMismatch, "sensitivity estimates live on different grids");
    std::vector<Complex> out(sens.size());
    std::ostringstream bad;
    size_t n_bad = 0;
    for (size_t k = 0; k < sens.size(); ++k) {
        if (std::abs(sens[k]) <= threshold) {
            if (n_bad++ < 8)
                bad << (n_bad > 1 ? ", " : "") << sens.grid()[k];
            continue;
        }
        out[k] = proc_sens[k] / sens[k];
    }
    if (n_bad > 0)
        fail(ErrorKind::Excitation, "sensitivity magnitude below " + std::to_string(threshold) + " at " +
                                        std::to_string(n_bad) + " frequencies (rad/sample): " + bad.str() +
                                        (n_bad > 8 ? ", ..." : ""));
    return {std::move(out), sens.grid_ptr()};
}

} // namespace fdlpv
