#include "fdlpv/factorization.hpp"

#include "fdlpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdlpv {

const char* channel_name(Channel c) noexcept {
    switch (c) {
    case Channel::S: return "S";
    case Channel::SG: return "SG";
    case Channel::KS: return "KS";
    case Channel::T: return "T";
    }
    return "?";
}

Channel parse_channel(const std::string& name) {
    for (Channel c : kChannels)
        if (name == channel_name(c))
            return c;
    if (name == "GS")
        return Channel::SG;
    fail(ErrorKind::Config, "unknown channel '" + name + "' (expected S, SG, KS or T)");
}

namespace {

void require_stable_controller(const RationalTf& k0) {
    const double rho = k0.minimal().max_pole_modulus();
    if (rho >= 1.0) {
        std::ostringstream os;
        os << "initial controller has a pole of modulus " << rho
           << "; the coprime construction needs a stable controller";
        fail(ErrorKind::Unstable, os.str());
    }
}

} // namespace

double bezout_residual(const CoprimeFrfPair& pair, const BezoutWitness& witness) {
    const FrequencyGrid& grid = pair.n_g.grid();
    double worst = 0.0;
    for (size_t k = 0; k < grid.size(); ++k) {
        const Complex x = witness.x.at_frequency(grid[k]);
        const Complex y = witness.y.at_frequency(grid[k]);
        worst = std::max(worst, std::abs(pair.n_g[k] * x + pair.d_g[k] * y - 1.0));
    }
    return worst;
}

CoprimeFrfPair project_bezout(const CoprimeFrfPair& pair, const RationalTf& controller0) {
    const FrequencyGrid& grid = pair.n_g.grid();
    std::vector<Complex> n(pair.n_g.values());
    std::vector<Complex> d(pair.d_g.values());
    for (size_t k = 0; k < grid.size(); ++k) {
        const Complex kk = controller0.at_frequency(grid[k]);
        const Complex r = n[k] * kk + d[k] - 1.0;
        const double scale = std::norm(kk) + 1.0;
        n[k] -= r * std::conj(kk) / scale;
        d[k] -= r / scale;
    }
    return {FrfResponse(std::move(n), pair.n_g.grid_ptr()), FrfResponse(std::move(d), pair.d_g.grid_ptr())};
}

CoprimeFactorization coprime_from_closed_loop(const FrfResponse& sens, const FrfResponse& proc_sens,
                                              const RationalTf& controller0, const CoprimeOptions& options) {
    require(sens.same_grid(proc_sens), ErrorKind::GridMismatch, "sensitivity estimates live on different grids");
    require_stable_controller(controller0);
    CoprimeFactorization out{{proc_sens, sens},
                             {controller0, RationalTf::gain(1.0, controller0.sample_rate())}};
    if (options.project)
        out.pair = project_bezout(out.pair, controller0);
    const double res = bezout_residual(out.pair, out.witness);
    if (res > options.bezout_tolerance) {
        std::ostringstream os;
        os << "Bezout residual " << res << " exceeds " << options.bezout_tolerance;
        fail(ErrorKind::Bezout, os.str());
    }
    return out;
}

CoprimeFactorization frozen_coprime_from_model(const RationalTf& g, const RationalTf& controller0,
                                               const FrequencyGrid& grid) {
    require_stable_controller(controller0);
    // S = a d / (a d + b c), GS = b d / (a d + b c) with G = b/a, K0 = c/d.
    const Polynomial& b = g.num();
    const Polynomial& a = g.den();
    const Polynomial& c = controller0.num();
    const Polynomial& d = controller0.den();
    const Polynomial chi = a * d + b * c;
    require(!chi.is_zero(), ErrorKind::Degenerate, "1 + G K0 vanishes identically");
    const RationalTf s(a * d, chi, g.sample_rate());
    const RationalTf gs(b * d, chi, g.sample_rate());
    if (!s.minimal().is_stable() || !gs.minimal().is_stable())
        fail(ErrorKind::Unstable, "initial controller does not stabilize the plant; factors are not stable");
    // pointwise from G and K0: the expanded products above lose digits near clustered roots
    std::vector<Complex> sv(grid.size());
    std::vector<Complex> gsv(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        const Complex z = std::polar(1.0, grid[k]);
        const Complex ak = a(z);
        const Complex dk = d(z);
        const Complex den = ak * dk + b(z) * c(z);
        sv[k] = ak * dk / den;
        gsv[k] = b(z) * dk / den;
    }
    const GridPtr gp = make_grid(grid);
    CoprimeFactorization out{{FrfResponse(std::move(gsv), gp), FrfResponse(std::move(sv), gp)},
                             {controller0, RationalTf::gain(1.0, controller0.sample_rate())}};
    return out;
}

ClosedLoopFactorData assemble_closed_loop(const CoprimeFrfPair& pair, std::span<const Complex> nk,
                                          std::span<const Complex> dk) {
    const size_t n = pair.n_g.size();
    require(pair.d_g.size() == n && nk.size() == n && dk.size() == n, ErrorKind::GridMismatch,
            "controller factor data length differs from the grid");
    ClosedLoopFactorData out;
    out.d_p.resize(n);
    for (auto& v : out.n_p)
        v.resize(n);
    for (size_t k = 0; k < n; ++k) {
        const Complex ng = pair.n_g[k];
        const Complex dg = pair.d_g[k];
        out.d_p[k] = dg * dk[k] + ng * nk[k];
        out.n_p[0][k] = dg * dk[k];
        out.n_p[1][k] = ng * dk[k];
        out.n_p[2][k] = dg * nk[k];
        out.n_p[3][k] = ng * nk[k];
    }
    return out;
}

} // namespace fdlpv
