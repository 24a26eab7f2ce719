#include "helpers.hpp"

#include "fdlpv/factorization.hpp"
#include "fdlpv/plant.hpp"
#include "fdlpv/workflow.hpp"

#include <doctest.h>

#include <random>

using namespace fdlpv;
using fdlpv::test::error_kind;
using fdlpv::test::max_abs_diff;

namespace {

GridPtr unit_grid(size_t n = 256) { return make_grid(FrequencyGrid::linear(0.0, 3.14, n, 1.0)); }

RationalTf tf(std::vector<double> num_desc, std::vector<double> den_desc) {
    return RationalTf::from_descending(num_desc, den_desc);
}

} // namespace

TEST_SUITE("factorization") {
    TEST_CASE("G = 1/(z - 2), K0 = 2: N_G = 1/z, D_G = (z - 2)/z") {
        const auto grid = unit_grid();
        const RationalTf g = tf({1.0}, {1.0, -2.0});
        const RationalTf k0 = RationalTf::gain(2.0);
        const CoprimeFactorization f = frozen_coprime_from_model(g, k0, *grid);
        std::vector<Complex> n(grid->size()), d(grid->size());
        for (size_t k = 0; k < grid->size(); ++k) {
            const Complex z = std::polar(1.0, (*grid)[k]);
            n[k] = 1.0 / z;
            d[k] = (z - 2.0) / z;
        }
        CHECK(max_abs_diff(f.pair.n_g.values(), n) < 1e-14);
        CHECK(max_abs_diff(f.pair.d_g.values(), d) < 1e-14);
        CHECK(bezout_residual(f.pair, f.witness) < 1e-14);

        // data path from the same S and GS
        const CoprimeFactorization fd =
            coprime_from_closed_loop(FrfResponse(d, grid), FrfResponse(n, grid), k0);
        CHECK(fd.witness.x.dc_gain() == 2.0);
        CHECK(fd.witness.y.dc_gain() == 1.0);
        CHECK(bezout_residual(fd.pair, fd.witness) < 1e-14);
    }

    TEST_CASE("open loop: stable G with K0 = 0") {
        const auto grid = unit_grid();
        const RationalTf g = tf({0.5}, {1.0, -0.9});
        const CoprimeFactorization f = frozen_coprime_from_model(g, RationalTf::gain(0.0), *grid);
        for (size_t k = 0; k < grid->size(); ++k) {
            CHECK(std::abs(f.pair.d_g[k] - 1.0) < 1e-14);
            CHECK(std::abs(f.pair.n_g[k] - g.at_frequency((*grid)[k])) < 1e-12);
        }
        const CoprimeFactorization u = frozen_coprime_from_model(RationalTf::gain(1.0), RationalTf::gain(0.0), *grid);
        CHECK(std::abs(u.pair.n_g[3] - 1.0) < 1e-15);
        CHECK(std::abs(u.pair.d_g[3] - 1.0) < 1e-15);
    }

    TEST_CASE("an unstable initial controller is rejected") {
        const auto grid = unit_grid(16);
        const RationalTf k0 = tf({1.0}, {1.0, -1.5});
        const FrfResponse ones(std::vector<Complex>(16, 1.0), grid);
        CHECK(error_kind([&] { (void)coprime_from_closed_loop(ones, ones, k0); }) == ErrorKind::Unstable);
        CHECK(error_kind([&] { (void)frozen_coprime_from_model(tf({1.0}, {1.0, -0.5}), k0, *grid); }) ==
              ErrorKind::Unstable);
    }

    TEST_CASE("a controller that does not stabilize gives unstable factors") {
        const auto grid = unit_grid(16);
        CHECK(error_kind([&] {
                  (void)frozen_coprime_from_model(tf({1.0}, {1.0, -2.0}), RationalTf::gain(0.5), *grid);
              }) == ErrorKind::Unstable);
    }

    TEST_CASE("Bezout residual above tolerance is an error") {
        const auto grid = unit_grid(16);
        const FrfResponse s(std::vector<Complex>(16, 1.0), grid);
        const FrfResponse gs(std::vector<Complex>(16, 0.1), grid);
        CHECK(error_kind([&] { (void)coprime_from_closed_loop(s, gs, RationalTf::gain(2.0)); }) ==
              ErrorKind::Bezout);
        CoprimeOptions opt;
        opt.project = true;
        const CoprimeFactorization f = coprime_from_closed_loop(s, gs, RationalTf::gain(2.0), opt);
        CHECK(bezout_residual(f.pair, f.witness) < 1e-14);
    }

    TEST_CASE("projection is the minimum-norm correction") {
        const auto grid = unit_grid(32);
        std::mt19937_64 rng(2);
        std::normal_distribution<double> g;
        std::vector<Complex> n(32), d(32);
        for (size_t k = 0; k < 32; ++k) {
            n[k] = {g(rng), g(rng)};
            d[k] = {g(rng), g(rng)};
        }
        const RationalTf k0 = tf({0.7, -0.63}, {1.0, -0.95});
        const CoprimeFrfPair in{FrfResponse(n, grid), FrfResponse(d, grid)};
        const CoprimeFrfPair out = project_bezout(in, k0);
        for (size_t k = 0; k < 32; ++k) {
            const Complex kk = k0.at_frequency((*grid)[k]);
            CHECK(std::abs(out.n_g[k] * kk + out.d_g[k] - 1.0) < 1e-13);
            // correction (dN, dD) is parallel to (conj K0, 1)
            const Complex dn = out.n_g[k] - n[k];
            const Complex dd = out.d_g[k] - d[k];
            CHECK(std::abs(dn - dd * std::conj(kk)) < 1e-13);
        }
    }

    TEST_CASE("data path and model path agree on the surrogate") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        const RationalTf k0 = default_controller0(m.sample_rate);
        const auto grid = make_grid(default_grid(512, m.sample_rate));
        for (double p : {30.0, 40.0, 50.0}) {
            const RationalTf g = frozen_tf(m, p);
            const CoprimeFactorization a = frozen_coprime_from_model(g, k0, *grid);
            std::vector<Complex> s(grid->size()), gs(grid->size());
            for (size_t k = 0; k < grid->size(); ++k) {
                const Complex gk = g.at_frequency((*grid)[k]);
                const Complex kk = k0.at_frequency((*grid)[k]);
                s[k] = 1.0 / (1.0 + gk * kk);
                gs[k] = gk * s[k];
            }
            const CoprimeFactorization b = coprime_from_closed_loop(FrfResponse(s, grid), FrfResponse(gs, grid), k0);
            CHECK(max_abs_diff(a.pair.n_g.values(), b.pair.n_g.values()) < 1e-10);
            CHECK(max_abs_diff(a.pair.d_g.values(), b.pair.d_g.values()) < 1e-10);
            CHECK(bezout_residual(a.pair, a.witness) < 1e-8);
            // quotient recovery
            for (size_t k = 0; k < grid->size(); ++k) {
                const Complex gk = g.at_frequency((*grid)[k]);
                CHECK(std::abs(a.pair.n_g[k] / a.pair.d_g[k] - gk) < 1e-9 * std::abs(gk));
            }
        }
    }

    TEST_CASE("an unstable plant with a stabilizing controller has stable factors") {
        const RationalTf g = tf({1.0}, {1.0, -2.0});
        const RationalTf k0 = RationalTf::gain(1.5);
        const Polynomial chi = g.den() * k0.den() + g.num() * k0.num();
        CHECK(RationalTf(Polynomial{1.0}, chi).max_pole_modulus() < 1.0);
        const auto grid = unit_grid(64);
        const CoprimeFactorization f = frozen_coprime_from_model(g, k0, *grid);
        CHECK(bezout_residual(f.pair, f.witness) < 1e-12);
    }

    TEST_CASE("assemble_closed_loop examples") {
        const auto grid = make_grid(FrequencyGrid({0.0, 0.5, 1.0}, 1.0));
        const RationalTf g = tf({1.0}, {1.0, -2.0});
        const CoprimeFactorization f = frozen_coprime_from_model(g, RationalTf::gain(2.0), *grid);
        const size_t n = grid->size();

        SUBCASE("witness controller gives D_p = 1") {
            const auto cl = assemble_closed_loop(f.pair, std::vector<Complex>(n, 2.0), std::vector<Complex>(n, 1.0));
            for (const Complex& v : cl.d_p)
                CHECK(std::abs(v - 1.0) < 1e-15);
        }
        SUBCASE("open loop") {
            const auto cl = assemble_closed_loop(f.pair, std::vector<Complex>(n, 0.0), std::vector<Complex>(n, 1.0));
            CHECK(cl.d_p == f.pair.d_g.values());
            CHECK(cl.channel(Channel::S) == f.pair.d_g.values());
            CHECK(cl.channel(Channel::SG) == f.pair.n_g.values());
            for (size_t k = 0; k < n; ++k) {
                CHECK(cl.channel(Channel::KS)[k] == 0.0);
                CHECK(cl.channel(Channel::T)[k] == 0.0);
            }
        }
        SUBCASE("nk = 1.5 at z = 1 gives D_p(1) = 0.5") {
            const auto cl = assemble_closed_loop(f.pair, std::vector<Complex>(n, 1.5), std::vector<Complex>(n, 1.0));
            CHECK(std::abs(cl.d_p[0] - 0.5) < 1e-15);
        }
        SUBCASE("length mismatch") {
            CHECK(error_kind([&] {
                      (void)assemble_closed_loop(f.pair, std::vector<Complex>(n + 1, 1.0),
                                                 std::vector<Complex>(n + 1, 1.0));
                  }) == ErrorKind::GridMismatch);
        }
    }

    TEST_CASE("assembly is linear in the controller factors") {
        const auto grid = unit_grid(64);
        const CoprimeFactorization f =
            frozen_coprime_from_model(tf({0.5}, {1.0, -0.9}), RationalTf::gain(0.3), *grid);
        std::mt19937_64 rng(4);
        std::normal_distribution<double> g;
        auto rnd = [&] {
            std::vector<Complex> v(64);
            for (auto& x : v)
                x = {g(rng), g(rng)};
            return v;
        };
        const auto n1 = rnd(), d1 = rnd(), n2 = rnd(), d2 = rnd();
        std::vector<Complex> ns(64), ds(64);
        for (size_t k = 0; k < 64; ++k) {
            ns[k] = n1[k] + n2[k];
            ds[k] = d1[k] + d2[k];
        }
        const auto a = assemble_closed_loop(f.pair, n1, d1);
        const auto b = assemble_closed_loop(f.pair, n2, d2);
        const auto c = assemble_closed_loop(f.pair, ns, ds);
        for (size_t k = 0; k < 64; ++k) {
            CHECK(std::abs(c.d_p[k] - a.d_p[k] - b.d_p[k]) < 1e-14);
            for (Channel ch : kChannels)
                CHECK(std::abs(c.channel(ch)[k] - a.channel(ch)[k] - b.channel(ch)[k]) < 1e-14);
        }
    }

    TEST_CASE("channel names") {
        for (Channel c : kChannels)
            CHECK(parse_channel(channel_name(c)) == c);
        CHECK(parse_channel("GS") == Channel::SG);
        CHECK(error_kind([] { (void)parse_channel("X"); }) == ErrorKind::Config);
    }
}
