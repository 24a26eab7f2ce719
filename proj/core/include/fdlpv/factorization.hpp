#pragma once

#include "fdlpv/frf.hpp"
#include "fdlpv/rational.hpp"

#include <array>
#include <span>

namespace fdlpv {

// Stable coprime factors G = N_G / D_G sampled on a grid.
struct CoprimeFrfPair {
    FrfResponse n_g;
    FrfResponse d_g;
};

// X, Y with N_G X + D_G Y = 1.
struct BezoutWitness {
    RationalTf x;
    RationalTf y;
};

struct CoprimeFactorization {
    CoprimeFrfPair pair;
    BezoutWitness witness;
};

enum class Channel { S = 0, SG = 1, KS = 2, T = 3 };
inline constexpr std::array<Channel, 4> kChannels{Channel::S, Channel::SG, Channel::KS, Channel::T};
[[nodiscard]] const char* channel_name(Channel c) noexcept;
[[nodiscard]] Channel parse_channel(const std::string& name);

struct ClosedLoopFactorData {
    std::vector<Complex> d_p;
    // Indexed by Channel: D_G D_K, N_G D_K, D_G N_K, N_G N_K.
    std::array<std::vector<Complex>, 4> n_p;

    [[nodiscard]] const std::vector<Complex>& channel(Channel c) const { return n_p[static_cast<size_t>(c)]; }
};

struct CoprimeOptions {
    double bezout_tolerance = 1e-6;
    // Replace the estimates by their least-squares projection onto N_G K0 + D_G = 1 first.
    bool project = false;
};

// N_G = proc_sens, D_G = sens, witness (K0, 1). Requires a stable K0.
[[nodiscard]] CoprimeFactorization coprime_from_closed_loop(const FrfResponse& sens, const FrfResponse& proc_sens,
                                                            const RationalTf& controller0,
                                                            const CoprimeOptions& options = {});

// Same factors computed analytically from rational G and K0.
[[nodiscard]] CoprimeFactorization frozen_coprime_from_model(const RationalTf& g, const RationalTf& controller0,
                                                             const FrequencyGrid& grid);

// Minimum-norm correction (dN, dD) such that (N_G + dN) K0 + (D_G + dD) = 1 pointwise.
[[nodiscard]] CoprimeFrfPair project_bezout(const CoprimeFrfPair& pair, const RationalTf& controller0);

// max_k |N_G X + D_G Y - 1| on the grid.
[[nodiscard]] double bezout_residual(const CoprimeFrfPair& pair, const BezoutWitness& witness);

[[nodiscard]] ClosedLoopFactorData assemble_closed_loop(const CoprimeFrfPair& pair, std::span<const Complex> nk,
                                                        std::span<const Complex> dk);

} // namespace fdlpv
