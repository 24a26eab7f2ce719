#include "helpers.hpp"

#include "fdlpv/analysis.hpp"
#include "fdlpv/synthesis.hpp"
#include "fdlpv/workflow.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace fdlpv;
using fdlpv::test::error_kind;

namespace {

FrequencyGrid unit_grid(size_t n = 512) {
    std::vector<double> w(n);
    for (size_t k = 0; k < n; ++k)
        w[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1);
    return {w, 1.0};
}

RationalTf tf(std::vector<double> num_desc, std::vector<double> den_desc) {
    return RationalTf::from_descending(num_desc, den_desc);
}

// D_p of the loop (G, K) with FIR-normalized factors: (a d + b c) / z^(deg a + deg d).
std::vector<Complex> fir_dp(const RationalTf& g, const RationalTf& k, const FrequencyGrid& grid) {
    const Polynomial chi = g.den() * k.den() + g.num() * k.num();
    const int shift = g.den().degree() + k.den().degree();
    std::vector<Complex> out(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        const Complex z = std::polar(1.0, grid[i]);
        out[i] = chi(z) / std::pow(z, shift);
    }
    return out;
}

Polynomial random_poly(std::mt19937_64& rng, int degree, double max_modulus) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Complex> roots;
    while (static_cast<int>(roots.size()) < degree) {
        const double r = max_modulus * u(rng);
        if (degree - static_cast<int>(roots.size()) >= 2 && u(rng) < 0.5) {
            const Complex z = std::polar(r, std::numbers::pi * u(rng));
            roots.push_back(z);
            roots.push_back(std::conj(z));
        } else {
            roots.emplace_back(u(rng) < 0.5 ? r : -r, 0.0);
        }
    }
    return Polynomial::from_roots(roots);
}

} // namespace

TEST_SUITE("analysis") {
    TEST_CASE("D_p = 1 is certified with the unit multiplier") {
        const auto grid = unit_grid(64);
        MultiplierOptions unity;
        unity.unity = true;
        const Certificate c = check_stability({std::vector<Complex>(64, 1.0)}, grid, {0.0}, 1e-6, unity);
        CHECK(c.status == CertificateStatus::Certified);
        CHECK(c.points[0].multiplier == "unity");
        CHECK(c.min_margin() == doctest::Approx(1.0));
    }

    TEST_CASE("D_p = e^{iw} - 0.5 needs a multiplier and is certified") {
        const auto grid = unit_grid();
        std::vector<Complex> d(grid.size());
        for (size_t k = 0; k < grid.size(); ++k)
            d[k] = std::polar(1.0, grid[k]) - 0.5;
        MultiplierOptions unity;
        unity.unity = true;
        CHECK(check_stability({d}, grid, {0.0}, 1e-6, unity).status != CertificateStatus::Certified);
        const Certificate c = check_stability({d}, grid, {0.0}, 1e-6);
        CHECK(c.status == CertificateStatus::Certified);
        CHECK(c.points[0].min_margin >= 1e-6);
        CHECK(oracle_stability(tf({1.0}, {1.0, 0.0}), tf({-0.5}, {1.0})));
    }

    TEST_CASE("1/(z - 2) with K = 4 is refuted and the oracle agrees") {
        const auto grid = unit_grid();
        const RationalTf g = tf({1.0}, {1.0, -2.0});
        const RationalTf k = RationalTf::gain(4.0);
        const Certificate c = check_stability({fir_dp(g, k, grid)}, grid, {0.0}, 1e-6);
        CHECK(c.status == CertificateStatus::Refuted);
        CHECK_FALSE(c.reason.empty());
        CHECK_FALSE(oracle_stability(g, k));
        CHECK(oracle_spectral_radius(g, k) == doctest::Approx(2.0));
    }

    TEST_CASE("oracle examples") {
        const RationalTf g = tf({1.0}, {1.0, -2.0});
        CHECK(oracle_stability(g, RationalTf::gain(2.0)));
        CHECK(oracle_spectral_radius(g, RationalTf::gain(2.0)) < 1e-12);
        CHECK_FALSE(oracle_stability(g, RationalTf::gain(0.5)));
        CHECK(oracle_spectral_radius(g, RationalTf::gain(0.5)) == doctest::Approx(1.5));
        CHECK(oracle_stability(tf({0.5}, {1.0, -0.9}), RationalTf::gain(0.0)));
    }

    TEST_CASE("grid test agrees with the pole oracle on random loops") {
        const auto grid = unit_grid();
        std::mt19937_64 rng(2024);
        std::uniform_int_distribution<int> order(1, 4);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int tested = 0;
        int agree = 0;
        while (tested < 40) {
            const int ng = order(rng);
            const int nk = order(rng);
            const RationalTf g(random_poly(rng, order(rng) % (ng + 1), 1.3) * (u(rng) + 0.1),
                               random_poly(rng, ng, 1.3));
            const RationalTf k(random_poly(rng, order(rng) % (nk + 1), 1.3) * (u(rng) + 0.1),
                               random_poly(rng, nk, 1.3));
            const double rho = oracle_spectral_radius(g, k);
            if (!std::isfinite(rho) || std::abs(rho - 1.0) < 1e-3)
                continue;
            ++tested;
            const Certificate c = check_stability({fir_dp(g, k, grid)}, grid, {0.0}, 0.0);
            const bool stable = rho < 1.0;
            if ((c.status == CertificateStatus::Certified) == stable &&
                (c.status == CertificateStatus::Refuted) == !stable)
                ++agree;
            else
                MESSAGE("disagreement: rho = " << rho << ", status " << to_string(c.status));
        }
        CHECK(agree == tested);
    }

    TEST_CASE("performance test") {
        SurrogateProblemOptions opt;
        opt.frequencies = 96;
        opt.order_n = 3;
        opt.order_d = 3;
        const SynthesisProblem pr = surrogate_problem(LpvSurrogateModel::surrogate_v1(), opt);
        const SynthesisResult res = bisect_gamma(pr);
        const auto cl = closed_loop_data(pr, res.theta);
        const auto& pts = pr.scheduling.points();
        const double achieved = compute_achieved_gamma(cl, pr.weights, *pr.grid);
        CHECK(achieved <= res.gamma * (1.0 + 1e-6));
        CHECK(achieved == doctest::Approx(res.achieved_gamma).epsilon(1e-9));

        SUBCASE("synthesized controller is certified with alpha = 1") {
            MultiplierOptions unity;
            unity.unity = true;
            const Certificate c = check_performance(cl, pr.weights, *pr.grid, pts, res.gamma, 0.5 * res.epsilon, unity);
            CHECK(c.status == CertificateStatus::Certified);
            REQUIRE(c.gamma.has_value());
            CHECK(*c.gamma == res.gamma);
        }
        SUBCASE("huge gamma reduces to the stability test") {
            std::vector<std::vector<Complex>> dp;
            for (const auto& d : cl)
                dp.push_back(d.d_p);
            const Certificate s = check_stability(dp, *pr.grid, pts, 1e-9);
            const Certificate p = check_performance(cl, pr.weights, *pr.grid, pts, 1e12, 1e-9);
            CHECK(s.status == p.status);
            CHECK(s.status == CertificateStatus::Certified);
        }
        SUBCASE("gamma below the achieved level is refuted, and stays refuted further down") {
            for (double f : {0.98, 0.7, 0.3}) {
                const Certificate c = check_performance(cl, pr.weights, *pr.grid, pts, f * achieved, 0.0);
                CHECK(c.status == CertificateStatus::Refuted);
            }
        }
        SUBCASE("weights scaled by 2 double the achieved gamma") {
            CHECK(compute_achieved_gamma(cl, pr.weights.scaled(2.0), *pr.grid) == doctest::Approx(2.0 * achieved));
        }
        SUBCASE("a found multiplier can be absorbed into the controller") {
            // same controller times a stable bi-proper minimum-phase factor
            auto bent = cl;
            std::vector<Complex> turn(pr.grid->size());
            for (size_t k = 0; k < turn.size(); ++k)
                turn[k] = (std::polar(1.0, (*pr.grid)[k]) - 0.3) / (std::polar(1.0, (*pr.grid)[k]) - 0.8);
            for (auto& d : bent) {
                for (size_t k = 0; k < turn.size(); ++k) {
                    d.d_p[k] *= turn[k];
                    for (auto& n : d.n_p)
                        n[k] *= turn[k];
                }
            }
            const double g = 1.5 * achieved;
            const Certificate c = check_performance(bent, pr.weights, *pr.grid, pts, g, 0.0);
            REQUIRE(c.status == CertificateStatus::Certified);
            auto absorbed = bent;
            for (size_t i = 0; i < absorbed.size(); ++i) {
                const auto& a = c.points[i].alpha;
                for (size_t k = 0; k < a.size(); ++k) {
                    absorbed[i].d_p[k] *= a[k];
                    for (auto& n : absorbed[i].n_p)
                        n[k] *= a[k];
                }
            }
            MultiplierOptions unity;
            unity.unity = true;
            CHECK(check_performance(absorbed, pr.weights, *pr.grid, pts, g, 0.0, unity).status ==
                  CertificateStatus::Certified);
        }
    }

    TEST_CASE("G = 0, K = 0, W_S = 1 gives gamma = 1") {
        const auto grid = unit_grid(32);
        const auto gp = make_grid(grid);
        const CoprimeFrfPair pair{FrfResponse(std::vector<Complex>(32, 0.0), gp),
                                  FrfResponse(std::vector<Complex>(32, 1.0), gp)};
        const auto cl = assemble_closed_loop(pair, std::vector<Complex>(32, 0.0), std::vector<Complex>(32, 1.0));
        WeightSet w;
        w.w = {Weight::constant(1.0), Weight::constant(0.0), Weight::constant(0.0), Weight::constant(0.0)};
        CHECK(compute_achieved_gamma({cl}, w, grid) == 1.0);
    }

    TEST_CASE("rational fit recovers a low-order response") {
        const auto grid = unit_grid(200);
        const RationalTf h = tf({0.3, 0.1}, {1.0, -0.5, 0.06});
        const RationalTf fit = fit_rational(h.frf(grid).values(), grid, 2);
        for (size_t k = 0; k < grid.size(); k += 13)
            CHECK(std::abs(fit.at_frequency(grid[k]) - h.at_frequency(grid[k])) < 1e-8);
    }

    TEST_CASE("input validation") {
        const auto grid = unit_grid(8);
        CHECK(error_kind([&] { (void)check_stability({std::vector<Complex>(7, 1.0)}, grid, {0.0}, 0.0); }) ==
              ErrorKind::GridMismatch);
        CHECK(error_kind([&] { (void)check_stability({std::vector<Complex>(8, 1.0)}, grid, {0.0, 1.0}, 0.0); }) ==
              ErrorKind::InvalidArgument);
        CHECK(error_kind([&] { (void)check_stability({std::vector<Complex>(8, 1.0)}, grid, {0.0}, -1.0); }) ==
              ErrorKind::InvalidArgument);
    }
}
