#include "fdlpv/error.hpp"
#include "fdlpv/obf.hpp"

#include <algorithm>
#include <cmath>

namespace fdlpv {

ClusterResult cluster_poles(std::span<const Complex> samples, int clusters, double fuzziness, int max_iterations,
                            double tolerance) {
    require(!samples.empty(), ErrorKind::InvalidArgument, "no samples to cluster");
    require(clusters >= 1 && static_cast<size_t>(clusters) <= samples.size(), ErrorKind::InvalidArgument,
            "cluster count must lie in [1, number of samples]");
    require(fuzziness > 1.0, ErrorKind::InvalidArgument, "fuzziness exponent must exceed 1");
    const size_t n = samples.size();
    const auto c = static_cast<size_t>(clusters);

    // Farthest-point seeding starting from the sample nearest the mean.
    Complex mean{};
    for (const Complex& s : samples)
        mean += s;
    mean /= static_cast<double>(n);
    std::vector<Complex> centers;
    size_t first = 0;
    for (size_t i = 1; i < n; ++i)
        if (std::abs(samples[i] - mean) < std::abs(samples[first] - mean))
            first = i;
    centers.push_back(samples[first]);
    while (centers.size() < c) {
        size_t best = 0;
        double best_d = -1.0;
        for (size_t i = 0; i < n; ++i) {
            double d = INFINITY;
            for (const Complex& ctr : centers)
                d = std::min(d, std::abs(samples[i] - ctr));
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        centers.push_back(samples[best]);
    }

    const double expo = 2.0 / (fuzziness - 1.0);
    std::vector<double> u(n * c);
    ClusterResult out;
    for (int it = 0; it < max_iterations; ++it) {
        for (size_t i = 0; i < n; ++i) {
            double* ui = &u[i * c];
            size_t exact = c;
            for (size_t j = 0; j < c; ++j)
                if (std::abs(samples[i] - centers[j]) == 0.0) {
                    exact = j;
                    break;
                }
            if (exact < c) {
                std::fill(ui, ui + c, 0.0);
                ui[exact] = 1.0;
                continue;
            }
            for (size_t j = 0; j < c; ++j) {
                const double dj = std::abs(samples[i] - centers[j]);
                double acc = 0.0;
                for (size_t l = 0; l < c; ++l)
                    acc += std::pow(dj / std::abs(samples[i] - centers[l]), expo);
                ui[j] = 1.0 / acc;
            }
        }
        double shift = 0.0;
        for (size_t j = 0; j < c; ++j) {
            Complex num{};
            double den = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double w = std::pow(u[i * c + j], fuzziness);
                num += w * samples[i];
                den += w;
            }
            const Complex next = den > 0.0 ? num / den : centers[j];
            shift = std::max(shift, std::abs(next - centers[j]));
            centers[j] = next;
        }
        out.iterations = it + 1;
        if (shift <= tolerance) {
            out.converged = true;
            break;
        }
    }
    for (const Complex& ctr : centers)
        if (std::none_of(out.centers.begin(), out.centers.end(),
                         [&](const Complex& kept) { return std::abs(kept - ctr) <= 1e-9; }))
            out.centers.push_back(ctr);
    return out;
}

} // namespace fdlpv
