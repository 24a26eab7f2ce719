#include "helpers.hpp"

#include "fdlpv/synthesis.hpp"
#include "fdlpv/workflow.hpp"

#include <doctest.h>

#include <random>

using namespace fdlpv;
using fdlpv::test::error_kind;

namespace {

// G = 0.5/(z - 0.9), K0 = 0, Laguerre(0.5, 2) bases, LTI, constant weights (tests/oracles/derive.py).
SynthesisProblem small_problem(double rel_tolerance = 1e-6) {
    SynthesisProblem pr;
    pr.grid = make_grid(FrequencyGrid::linear(0.01, 3.1, 32, 1.0));
    pr.scheduling = SchedulingGrid({0.0}, 0.0, 1.0);
    std::vector<Complex> ng(32);
    for (size_t k = 0; k < 32; ++k)
        ng[k] = 0.5 / (std::polar(1.0, (*pr.grid)[k]) - 0.9);
    pr.data.push_back({FrfResponse(ng, pr.grid), FrfResponse(std::vector<Complex>(32, 1.0), pr.grid)});
    pr.weights.w = {Weight::constant(0.5), Weight::constant(0.2), Weight::constant(0.1), Weight::constant(0.3)};
    pr.basis_n = ObfBasis::laguerre(0.5, 2);
    pr.basis_d = ObfBasis::laguerre(0.5, 2);
    pr.scheduling_basis = SchedulingBasis::constant(0.0, 1.0);
    pr.options.epsilon = 1e-6;
    pr.options.integral_action = false;
    pr.options.rel_tolerance = rel_tolerance;
    return pr;
}

SynthesisProblem small_surrogate(bool lti = false) {
    SurrogateProblemOptions opt;
    opt.frequencies = 96;
    opt.order_n = 3;
    opt.order_d = 3;
    opt.synthesis.rel_tolerance = 1e-3;
    SynthesisProblem pr = surrogate_problem(LpvSurrogateModel::surrogate_v1(), opt);
    return lti ? pr.as_lti() : pr;
}

Eigen::VectorXd random_theta(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd t(n);
    for (auto& v : t)
        v = g(rng);
    return t;
}

void check_certificate(const SynthesisProblem& pr, const SynthesisResult& r) {
    const auto cl = closed_loop_data(pr, r.theta);
    double worst = 0.0;
    double min_re = 1e300;
    for (size_t tau = 0; tau < cl.size(); ++tau)
        for (Channel c : kChannels) {
            const auto w = pr.weights[c].evaluate(*pr.grid);
            for (size_t k = 0; k < pr.grid->size(); ++k) {
                worst = std::max(worst, std::abs(w[k] * cl[tau].channel(c)[k] / cl[tau].d_p[k]));
                min_re = std::min(min_re, cl[tau].d_p[k].real());
            }
        }
    CHECK(worst <= r.gamma * (1.0 + 1e-6));
    CHECK(min_re >= r.epsilon - 1e-9);
}

} // namespace

TEST_SUITE("synthesis-engine") {
    TEST_CASE("evaluate_factors") {
        const auto grid = FrequencyGrid::linear(0.01, 3.1, 40, 1.0);
        auto theta = ControllerParameters::normalized(ObfBasis::laguerre(0.6, 3), ObfBasis::laguerre(0.6, 3),
                                                      SchedulingBasis::affine(30.0, 50.0), 1.0);
        SUBCASE("normalized parameters give K = 0") {
            auto [nk, dk] = evaluate_factors(theta, 35.0, grid);
            for (size_t k = 0; k < grid.size(); ++k) {
                CHECK(nk[k] == 0.0);
                CHECK(std::abs(dk[k] - 1.0) < 1e-15);
            }
        }
        SUBCASE("matches the rational form") {
            Eigen::VectorXd t = random_theta(theta.size(), 3);
            theta.unpack(t);
            theta.v.row(0) << 1.0, 0.0;
            for (double p : {30.0, 41.0, 50.0}) {
                auto [nk, dk] = evaluate_factors(theta, p, grid);
                const RationalTf n = theta.nk_tf(p);
                const RationalTf d = theta.dk_tf(p);
                for (size_t k = 0; k < grid.size(); ++k) {
                    CHECK(std::abs(nk[k] - n.at_frequency(grid[k])) < 1e-10);
                    CHECK(std::abs(dk[k] - d.at_frequency(grid[k])) < 1e-10);
                }
            }
        }
        SUBCASE("m = 1 is independent of p") {
            auto lti = ControllerParameters::normalized(ObfBasis::laguerre(0.6, 3), ObfBasis::laguerre(0.6, 3),
                                                        SchedulingBasis::constant(30.0, 50.0), 1.0);
            Eigen::VectorXd t = random_theta(lti.size(), 4);
            lti.unpack(t);
            lti.v(0, 0) = 1.0;
            CHECK(evaluate_factors(lti, 30.0, grid).first == evaluate_factors(lti, 50.0, grid).first);
        }
        SUBCASE("pack and unpack round trip; validation") {
            const Eigen::VectorXd t = random_theta(theta.size(), 5);
            theta.unpack(t);
            CHECK(theta.pack() == t);
            CHECK(error_kind([&] { theta.validate(); }) == ErrorKind::InvalidArgument);
            CHECK(error_kind([&] { theta.unpack(Eigen::VectorXd::Zero(3)); }) == ErrorKind::InvalidArgument);
        }
    }

    TEST_CASE("constraint count and gamma limit") {
        const SynthesisProblem pr = small_surrogate();
        const ConstraintSet cs = assemble_constraints(pr, 2.0);
        CHECK(cs.count() == 96 * 3 * 4);
        CHECK(cs.dp.cols() == pr.parameter_count());
        const ConstraintSet inf = assemble_constraints(pr, 1e15);
        const Eigen::VectorXd t = random_theta(pr.parameter_count(), 6);
        const Eigen::MatrixXd m = inf.margins(t);
        const Eigen::VectorXd re = (inf.dp * t.cast<Complex>()).real();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < 4; ++c)
                CHECK(m(r, c) == doctest::Approx(re(r) - inf.epsilon).epsilon(1e-9).scale(1.0));
    }

    TEST_CASE("hand assembly at one frequency on the 1/(z - 2) example") {
        SynthesisProblem pr;
        pr.grid = make_grid(FrequencyGrid({0.4}, 1.0));
        pr.scheduling = SchedulingGrid({0.0}, 0.0, 1.0);
        const Complex z = std::polar(1.0, 0.4);
        pr.data.push_back({FrfResponse({1.0 / z}, pr.grid), FrfResponse({(z - 2.0) / z}, pr.grid)});
        pr.weights.w = {Weight::constant(0.0), Weight::constant(0.0), Weight::constant(0.0), Weight::constant(2.0)};
        pr.basis_n = ObfBasis::laguerre(0.5, 1);
        pr.basis_d = ObfBasis::laguerre(0.5, 1);
        pr.scheduling_basis = SchedulingBasis::constant(0.0, 1.0);
        pr.options.epsilon = 0.01;
        pr.options.integral_action = false;
        const ConstraintSet cs = assemble_constraints(pr, 4.0);
        Eigen::VectorXd t(4);
        t << 1.5, 0.3, 1.0, -0.2;  // w0, w1, v0, v1
        const Complex phi1 = std::sqrt(0.75) / (z - 0.5);
        const Complex nk = 1.5 + 0.3 * phi1;
        const Complex dk = 1.0 - 0.2 * phi1;
        const Complex dp = (z - 2.0) / z * dk + nk / z;
        const double expected = dp.real() - std::abs(2.0 * nk / z) / 4.0 - 0.01;
        CHECK(cs.margins(t)(0, static_cast<int>(Channel::T)) == doctest::Approx(expected).epsilon(1e-13));
        CHECK(cs.margins(t)(0, static_cast<int>(Channel::S)) == doctest::Approx(dp.real() - 0.01).epsilon(1e-13));
    }

    TEST_CASE("constraint coefficients match the assembled closed loop") {
        const SynthesisProblem pr = small_surrogate();
        const ConstraintSet cs = assemble_constraints(pr, 1.0);
        auto theta = ControllerParameters::normalized(pr.basis_n, pr.basis_d, pr.scheduling_basis,
                                                      pr.grid->sample_rate());
        Eigen::VectorXd t = random_theta(pr.parameter_count(), 7);
        theta.unpack(t);
        const auto cl = closed_loop_data(pr, theta);
        const Eigen::VectorXcd tc = t.cast<Complex>();
        const Eigen::VectorXcd dp = cs.dp * tc;
        const size_t n = pr.grid->size();
        double worst = 0.0;
        for (size_t tau = 0; tau < cl.size(); ++tau)
            for (size_t k = 0; k < n; ++k) {
                const auto r = static_cast<Eigen::Index>(tau * n + k);
                worst = std::max(worst, std::abs(dp(r) - cl[tau].d_p[k]));
                for (Channel c : kChannels) {
                    const Complex wk = pr.weights[c].evaluate(*pr.grid)[k];
                    const Complex got = (cs.wn[static_cast<size_t>(c)].row(r) * tc)(0);
                    worst = std::max(worst, std::abs(got - wk * cl[tau].channel(c)[k]));
                }
            }
        CHECK(worst < 1e-9);

        // finite differences along a coordinate reproduce the coefficient column
        const Eigen::Index j = 5;
        const double h = 1e-3;
        Eigen::VectorXd tp = t;
        tp(j) += h;
        theta.unpack(tp);
        const auto clp = closed_loop_data(pr, theta);
        for (size_t k = 0; k < n; k += 7) {
            const Complex fd = (clp[1].d_p[k] - cl[1].d_p[k]) / h;
            CHECK(std::abs(fd - cs.dp(static_cast<Eigen::Index>(n + k), j)) < 1e-9 * (1.0 + std::abs(fd)));
        }
    }

    TEST_CASE("stability-only constraints are feasible at the Bezout witness") {
        const SynthesisProblem pr = small_problem();
        const ConstraintSet cs = assemble_constraints(pr, 1e12);
        const FeasibilityResult fr = feasibility_solve(cs, build_equalities(pr));
        CHECK(fr.feasible);
        CHECK(fr.margin >= 0.0);
    }

    TEST_CASE("contradictory equalities are infeasible") {
        const SynthesisProblem pr = small_problem();
        EqualityConstraints eq = normalization_constraints(pr);
        Eigen::RowVectorXd row = eq.a.row(0);
        eq.append(row, 0.0, "v0 = 0");
        const ConstraintSet cs = assemble_constraints(pr, 10.0);
        CHECK(error_kind([&] { (void)feasibility_solve(cs, eq); }) == ErrorKind::Infeasible);
    }

    TEST_CASE("G = 0 with W_S = 1 cannot reach gamma = 0.5") {
        SynthesisProblem pr = small_problem();
        pr.data[0].n_g = FrfResponse(std::vector<Complex>(32, 0.0), pr.grid);
        pr.weights.w = {Weight::constant(1.0), Weight::constant(0.0), Weight::constant(0.0), Weight::constant(0.0)};
        const FeasibilityResult fr = feasibility_solve(assemble_constraints(pr, 0.5), build_equalities(pr));
        CHECK_FALSE(fr.feasible);
        CHECK(fr.status == SolveStatus::Infeasible);
        const FeasibilityResult ok = feasibility_solve(assemble_constraints(pr, 1.01), build_equalities(pr));
        CHECK(ok.feasible);
    }

    TEST_CASE("small problem reaches the reference optimum") {
        // gamma* = 0.5159525621 (cvxpy + CLARABEL bisection, tests/oracles/derive.py)
        const SynthesisProblem pr = small_problem();
        const SynthesisResult r = bisect_gamma(pr);
        CHECK(r.gamma == doctest::Approx(0.5159525621).epsilon(2e-5));
        CHECK(r.gamma >= 0.5159525621 * (1.0 - 1e-6));
        CHECK(r.status == "certified");
        CHECK(r.min_margin >= 0.0);
        check_certificate(pr, r);
    }

    TEST_CASE("bisection iteration count") {
        SynthesisProblem pr = small_problem();
        pr.options.gamma_lo = 1.0;
        pr.options.gamma_hi = 4.0;
        pr.options.rel_tolerance = 0.0;
        pr.options.abs_tolerance = 0.5;
        const SynthesisResult r = bisect_gamma(pr);
        CHECK(r.iterations <= 3);
        CHECK(r.steps.size() == static_cast<size_t>(r.iterations) + 1);
    }

    TEST_CASE("infeasible upper bound is an error") {
        SynthesisProblem pr = small_problem();
        pr.options.gamma_lo = 0.1;
        pr.options.gamma_hi = 0.3;
        CHECK(error_kind([&] { (void)bisect_gamma(pr); }) == ErrorKind::Infeasible);
    }

    TEST_CASE("feasibility is monotone in gamma") {
        const SynthesisProblem pr = small_problem();
        const EqualityConstraints eq = build_equalities(pr);
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(std::log(0.3), std::log(1.0));
        for (int i = 0; i < 20; ++i) {
            double g1 = std::exp(u(rng));
            double g2 = std::exp(u(rng));
            if (g1 > g2)
                std::swap(g1, g2);
            const bool f1 = feasibility_solve(assemble_constraints(pr, g1), eq).feasible;
            const bool f2 = feasibility_solve(assemble_constraints(pr, g2), eq).feasible;
            CHECK((!f1 || f2));
        }
    }

    TEST_CASE("larger Laguerre order never hurts") {
        double prev = 1e300;
        for (int n : {0, 1, 2, 3}) {
            SynthesisProblem pr = small_problem(1e-4);
            pr.basis_n = ObfBasis::laguerre(0.5, n);
            pr.basis_d = ObfBasis::laguerre(0.5, n);
            const double g = bisect_gamma(pr).gamma;
            CHECK(g <= prev * (1.0 + 2e-4));
            prev = g;
        }
    }

    TEST_CASE("integral action puts a root of D_K at z = 1") {
        SynthesisProblem pr = small_surrogate();
        const SynthesisResult r = bisect_gamma(pr);
        for (double p : {30.0, 37.0, 50.0}) {
            const RationalTf d = r.theta.dk_tf(p);
            CHECK(std::abs(d.num()(1.0)) < 1e-8 * std::max(1.0, d.num().coeffs().back()));
        }
        check_certificate(pr, r);

        pr.basis_n = ObfBasis::laguerre(0.7, 0);
        pr.basis_d = ObfBasis::laguerre(0.7, 0);
        CHECK(error_kind([&] { (void)bisect_gamma(pr); }) == ErrorKind::Infeasible);
    }

    TEST_CASE("LPV beats LTI on the surrogate") {
        const SynthesisResult lpv = bisect_gamma(small_surrogate());
        const SynthesisResult lti = bisect_gamma(small_surrogate(true));
        CHECK(lpv.gamma < lti.gamma);
        CHECK(lti.theta.m() == 1);
        CHECK(lpv.theta.m() == 2);
    }
}
