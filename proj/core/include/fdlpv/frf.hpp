#pragma once

#include "fdlpv/polynomial.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fdlpv {

// Normalized angular frequencies in rad/sample, strictly increasing within [0, pi].
class FrequencyGrid {
public:
    FrequencyGrid(std::vector<double> omegas, double sample_rate);

    static FrequencyGrid linear(double omega_min, double omega_max, size_t n, double sample_rate);
    static FrequencyGrid logarithmic(double omega_min, double omega_max, size_t n, double sample_rate);

    [[nodiscard]] const std::vector<double>& omegas() const noexcept { return omegas_; }
    [[nodiscard]] size_t size() const noexcept { return omegas_.size(); }
    [[nodiscard]] double operator[](size_t k) const noexcept { return omegas_[k]; }
    [[nodiscard]] double sample_rate() const noexcept { return fs_; }
    [[nodiscard]] double hz(size_t k) const noexcept;
    // e^{i omega_k}
    [[nodiscard]] std::vector<Complex> unit_circle_points() const;

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

private:
    std::vector<double> omegas_;
    double fs_;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

inline GridPtr make_grid(FrequencyGrid grid) { return std::make_shared<const FrequencyGrid>(std::move(grid)); }

// Operating points p_tau inside the closed scheduling range.
class SchedulingGrid {
public:
    SchedulingGrid(std::vector<double> points, double lo, double hi);

    [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
    [[nodiscard]] size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double operator[](size_t i) const noexcept { return points_[i]; }
    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }
    [[nodiscard]] bool contains(double p) const noexcept { return p >= lo_ && p <= hi_; }

    friend bool operator==(const SchedulingGrid&, const SchedulingGrid&) = default;

private:
    std::vector<double> points_;
    double lo_;
    double hi_;
};

// Complex response samples on a frequency grid.
class FrfResponse {
public:
    FrfResponse(std::vector<Complex> values, GridPtr grid);

    [[nodiscard]] const std::vector<Complex>& values() const noexcept { return values_; }
    [[nodiscard]] const FrequencyGrid& grid() const noexcept { return *grid_; }
    [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }
    [[nodiscard]] size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] Complex operator[](size_t k) const noexcept { return values_[k]; }

    [[nodiscard]] bool same_grid(const FrfResponse& other) const noexcept;

    friend FrfResponse operator*(const FrfResponse& a, const FrfResponse& b);
    friend FrfResponse operator/(const FrfResponse& a, const FrfResponse& b);
    friend FrfResponse operator+(const FrfResponse& a, const FrfResponse& b);
    friend FrfResponse operator-(const FrfResponse& a, const FrfResponse& b);
    friend FrfResponse operator*(Complex s, const FrfResponse& a);

private:
    std::vector<Complex> values_;
    GridPtr grid_;
};

// Responses keyed by (operating point, channel label) on a shared grid.
class FrfDataset {
public:
    FrfDataset(GridPtr grid, SchedulingGrid scheduling, std::vector<std::string> channels);

    void set(double p, const std::string& channel, FrfResponse response);
    [[nodiscard]] const FrfResponse& at(double p, const std::string& channel) const;
    [[nodiscard]] bool has(double p, const std::string& channel) const;

    [[nodiscard]] const FrequencyGrid& grid() const noexcept { return *grid_; }
    [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }
    [[nodiscard]] const SchedulingGrid& scheduling() const noexcept { return scheduling_; }
    [[nodiscard]] const std::vector<std::string>& channels() const noexcept { return channels_; }

    // Throws unless every (point, channel) entry is present on the shared grid.
    void validate() const;

private:
    GridPtr grid_;
    SchedulingGrid scheduling_;
    std::vector<std::string> channels_;
    std::map<std::pair<double, std::string>, FrfResponse> entries_;
};

struct TimeRecord {
    std::vector<double> samples;
    double sample_rate = 1.0;
    std::string label;

    TimeRecord() = default;
    TimeRecord(std::vector<double> s, double fs, std::string name = {});

    [[nodiscard]] size_t size() const noexcept { return samples.size(); }
};

// Dataset file I/O: CSV with header `channel,p,omega,re,im`, or the JSON mirror.
FrfDataset load_dataset(const std::string& path);
void save_dataset(const FrfDataset& dataset, const std::string& path);

} // namespace fdlpv
