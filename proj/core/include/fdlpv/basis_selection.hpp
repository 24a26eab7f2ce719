#pragma once

#include "fdlpv/synthesis.hpp"

namespace fdlpv {

struct BasisSelectionOptions {
    int max_rounds = 3;
    double min_improvement = 0.01;  // relative gamma decrease needed to continue
    double fuzziness = 2.0;
    double max_modulus = 0.999;     // roots outside are not clustered
    double integrator_tolerance = 1e-3;
};

struct BasisSelectionRound {
    ObfBasis basis_n;
    ObfBasis basis_d;
    double gamma = 0.0;
    bool feasible = false;
};

struct BasisSelectionResult {
    ObfBasis basis_n;
    ObfBasis basis_d;
    SynthesisResult result;
    std::vector<BasisSelectionRound> rounds;  // rounds[0] is the initial problem
    int best_round = 0;
};

// Stable poles and zeros of the frozen controllers over the operating points, integrators excluded,
// mirrored into the closed upper half-plane.
[[nodiscard]] std::vector<Complex> controller_roots(const ControllerParameters& theta,
                                                    const std::vector<double>& points,
                                                    const BasisSelectionOptions& options = {});

// Pole sequence of length `order_d` from cluster centers; complex centers give conjugate pairs,
// never split across `order_n`.
[[nodiscard]] std::vector<Complex> poles_from_centers(const std::vector<Complex>& centers, int order_n, int order_d);

// Alternates synthesis and pole clustering; keeps the best iterate.
[[nodiscard]] BasisSelectionResult basis_selection_iterate(const SynthesisProblem& problem,
                                                           const BasisSelectionOptions& options = {});

} // namespace fdlpv
