#include "fdlpv/basis_selection.hpp"

#include "fdlpv/error.hpp"

#include <algorithm>
#include <cmath>

namespace fdlpv {

std::vector<Complex> controller_roots(const ControllerParameters& theta, const std::vector<double>& points,
                                      const BasisSelectionOptions& options) {
    std::vector<Complex> out;
    auto keep = [&](Complex r) {
        if (std::abs(r) >= options.max_modulus || std::abs(r - 1.0) < options.integrator_tolerance)
            return;
        out.emplace_back(r.real(), std::abs(r.imag()) < 1e-10 ? 0.0 : std::abs(r.imag()));
    };
    for (double p : points) {
        const RationalTf k = theta.controller_tf(p);
        for (Complex r : k.poles())
            keep(r);
        for (Complex r : k.zeros())
            keep(r);
    }
    return out;
}

std::vector<Complex> poles_from_centers(const std::vector<Complex>& centers, int order_n, int order_d) {
    require(!centers.empty(), ErrorKind::InvalidArgument, "no cluster centers");
    require(order_n >= 0 && order_d >= order_n, ErrorKind::InvalidArgument, "orders must satisfy 0 <= n_N <= n_D");
    std::vector<Complex> sorted = centers;
    std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
        if (std::abs(a) != std::abs(b))
            return std::abs(a) > std::abs(b);
        return std::arg(a) < std::arg(b);
    });
    std::vector<Complex> poles;
    size_t i = 0;
    while (static_cast<int>(poles.size()) < order_d) {
        const Complex c = sorted[i++ % sorted.size()];
        const int pos = static_cast<int>(poles.size());
        const bool crosses = pos < order_n && pos + 2 > order_n;
        if (std::abs(c.imag()) > 1e-6 && pos + 2 <= order_d && !crosses) {
            poles.push_back(c);
            poles.push_back(std::conj(c));
        } else {
            poles.emplace_back(c.real(), 0.0);
        }
    }
    return poles;
}

BasisSelectionResult basis_selection_iterate(const SynthesisProblem& problem, const BasisSelectionOptions& options) {
    require(options.max_rounds >= 0, ErrorKind::Config, "max_rounds must be non-negative");
    BasisSelectionResult out;
    out.basis_n = problem.basis_n;
    out.basis_d = problem.basis_d;
    out.result = bisect_gamma(problem);
    out.rounds.push_back({problem.basis_n, problem.basis_d, out.result.gamma, true});

    const int order_n = problem.basis_n.order();
    const int order_d = problem.basis_d.order();
    ControllerParameters current = out.result.theta;
    double last_gamma = out.result.gamma;
    for (int round = 1; round <= options.max_rounds && order_d > 0; ++round) {
        const std::vector<Complex> roots = controller_roots(current, problem.scheduling.points(), options);
        if (roots.empty())
            break;
        const int clusters = std::min<int>(order_d, static_cast<int>(roots.size()));
        const ClusterResult cl = cluster_poles(roots, clusters, options.fuzziness);
        const std::vector<Complex> poles = poles_from_centers(cl.centers, order_n, order_d);

        SynthesisProblem next = problem;
        next.basis_d = ObfBasis(poles);
        next.basis_n = next.basis_d.truncated(order_n);
        BasisSelectionRound rec{next.basis_n, next.basis_d, 0.0, false};
        SynthesisResult res;
        try {
            res = bisect_gamma(next);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Infeasible)
                throw;
            out.rounds.push_back(rec);
            break;
        }
        rec.gamma = res.gamma;
        rec.feasible = true;
        out.rounds.push_back(rec);
        const bool improved = res.gamma < last_gamma * (1.0 - options.min_improvement);
        if (res.gamma < out.result.gamma) {
            out.result = res;
            out.basis_n = next.basis_n;
            out.basis_d = next.basis_d;
            out.best_round = round;
        }
        if (!improved)
            break;
        last_gamma = res.gamma;
        current = res.theta;
    }
    return out;
}

} // namespace fdlpv
