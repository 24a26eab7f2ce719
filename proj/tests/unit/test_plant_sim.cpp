#include "helpers.hpp"

#include "fdlpv/plant.hpp"
#include "fdlpv/workflow.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <numbers>

using namespace fdlpv;
using fdlpv::test::error_kind;

namespace {

// First local maximum of |G| on a dense linear grid between 0.3 and 8 Hz.
double resonance_hz(const LpvSurrogateModel& m, double p) {
    const double fs = m.sample_rate;
    const auto grid = FrequencyGrid::linear(2.0 * std::numbers::pi * 0.3 / fs, 2.0 * std::numbers::pi * 8.0 / fs,
                                            7701, fs);
    const FrfResponse h = frozen_frf(m, p, grid);
    for (size_t k = 1; k + 1 < h.size(); ++k)
        if (std::abs(h[k]) > std::abs(h[k - 1]) && std::abs(h[k]) >= std::abs(h[k + 1]))
            return grid.hz(k);
    FAIL("no resonance peak");
    return 0.0;
}

bool full_rank(const Eigen::MatrixXd& m) { return Eigen::FullPivLU<Eigen::MatrixXd>(m).rank() == m.rows(); }

} // namespace

TEST_SUITE("plant-sim") {
    TEST_CASE("frozen transfer function equals the resolvent on a scheduling scan") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        const auto grid = FrequencyGrid::logarithmic(1e-3, 3.1, 200, m.sample_rate);
        for (int i = 0; i <= 20; ++i) {
            const double p = 30.0 + i;
            const FrfResponse a = frozen_frf(m, p, grid);
            const FrfResponse b = resolvent_frf(m, p, grid);
            double worst = 0.0;
            for (size_t k = 0; k < grid.size(); ++k)
                worst = std::max(worst, std::abs(a[k] - b[k]) / std::abs(b[k]));
            CHECK(worst < 1e-12);
        }
    }

    TEST_CASE("frozen denominators and responses match the independent oracle") {
        // tests/oracles/derive.py
        const auto m = LpvSurrogateModel::surrogate_v1();
        struct Row {
            double p;
            std::array<double, 4> den;
            double num;
            Complex h;
        };
        const std::array<Row, 3> rows{{
            {30.0, {1.0, -2.976, 2.95541175, -0.97941518675}, 2.73375e-05,
             {-0.3042311228394333, -0.22410631677940018}},
            {40.0, {1.0, -2.976, 2.95942125, -0.98342869625}, 3.645e-05,
             {-0.03848065752504478, -0.13917543484952194}},
            {50.0, {1.0, -2.976, 2.96488875, -0.98890166375}, 4.55625e-05,
             {-0.013271861355229888, -0.08615909808132427}},
        }};
        for (const Row& r : rows) {
            const RationalTf g = frozen_tf(m, r.p);
            const auto den = g.den().descending();
            REQUIRE(den.size() == 4);
            for (size_t k = 0; k < 4; ++k)
                CHECK(den[k] == doctest::Approx(r.den[k]).epsilon(1e-12));
            CHECK(g.num().degree() == 0);
            CHECK(g.num()[0] == doctest::Approx(r.num).epsilon(1e-12));
            CHECK(std::abs(g.at_frequency(0.05) - r.h) < 1e-9 * std::abs(r.h));
        }
    }

    TEST_CASE("poles are the eigenvalues of A(p)") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        for (double p : {30.0, 37.5, 50.0}) {
            const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(m.a(p)).eigenvalues();
            const auto poles = frozen_tf(m, p).poles();
            REQUIRE(poles.size() == 3);
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                double best = 1e9;
                for (const Complex& q : poles)
                    best = std::min(best, std::abs(q - ev(i)));
                CHECK(best < 1e-9);
            }
        }
    }

    TEST_CASE("resonance sits near 1.7 Hz at p = 30 and moves up with p") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        const double f30 = resonance_hz(m, 30.0);
        CHECK(f30 == doctest::Approx(1.73).epsilon(0.02));
        double prev = f30;
        for (double p : {35.0, 40.0, 45.0, 50.0}) {
            const double f = resonance_hz(m, p);
            CHECK(f > prev);
            prev = f;
        }
    }

    TEST_CASE("DC gain is strictly monotone in p") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        std::vector<double> dc;
        for (int i = 0; i <= 20; ++i)
            dc.push_back(frozen_tf(m, 30.0 + i).dc_gain());
        const bool up = dc[1] > dc[0];
        for (size_t i = 1; i < dc.size(); ++i)
            CHECK((up ? dc[i] > dc[i - 1] : dc[i] < dc[i - 1]));
    }

    TEST_CASE("frozen models are minimal and locally unstable") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        const int n = m.states();
        bool some_unstable = false;
        for (int i = 0; i <= 20; ++i) {
            const Eigen::MatrixXd a = m.a(30.0 + i);
            Eigen::MatrixXd ctrb(n, n), obsv(n, n);
            Eigen::VectorXd col = m.b;
            Eigen::RowVectorXd row = m.c;
            for (int k = 0; k < n; ++k) {
                ctrb.col(k) = col;
                obsv.row(k) = row;
                col = a * col;
                row = row * a;
            }
            CHECK(full_rank(ctrb));
            CHECK(full_rank(obsv));
            some_unstable = some_unstable || frozen_tf(m, 30.0 + i).max_pole_modulus() >= 1.0;
        }
        CHECK(some_unstable);
    }

    TEST_CASE("nilpotent shift register has a pure delay response") {
        LpvSurrogateModel m;
        m.a0 = Eigen::MatrixXd::Zero(3, 3);
        m.a0(1, 0) = 1.0;
        m.a0(2, 1) = 1.0;
        m.a1 = Eigen::MatrixXd::Zero(3, 3);
        m.b = Eigen::VectorXd::Unit(3, 0);
        m.c = Eigen::RowVectorXd::Unit(3, 2);
        m.sample_rate = 1.0;
        m.p_min = 0.0;
        m.p_max = 1.0;
        m.validate();
        const RationalTf g = frozen_tf(m, 0.5);
        CHECK(g.den().descending() == std::vector<double>{1.0, 0.0, 0.0, 0.0});
        CHECK(g.num().degree() == 0);
        CHECK(g.num()[0] == 1.0);
        std::vector<double> u(10, 0.0);
        u[0] = 1.0;
        const TimeRecord y = simulate_lpv(m, TimeRecord(u, 1.0), TimeRecord(std::vector<double>(10, 0.5), 1.0));
        for (size_t k = 0; k < 10; ++k)
            CHECK(y.samples[k] == (k == 3 ? 1.0 : 0.0));
    }

    TEST_CASE("constant scheduling simulation equals the frozen filter") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        std::mt19937_64 rng(5);
        std::normal_distribution<double> g;
        std::vector<double> u(2000);
        for (auto& v : u)
            v = g(rng);
        const TimeRecord y = simulate_lpv(m, TimeRecord(u, m.sample_rate),
                                          TimeRecord(std::vector<double>(u.size(), 42.0), m.sample_rate));
        const auto ref = frozen_tf(m, 42.0).filter(u);
        for (size_t k = 0; k < u.size(); ++k)
            CHECK(y.samples[k] == doctest::Approx(ref[k]).epsilon(1e-9).scale(1.0));
    }

    TEST_CASE("zero input gives zero output and mismatched records are rejected") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        const TimeRecord y = simulate_lpv(m, TimeRecord(std::vector<double>(100, 0.0), m.sample_rate),
                                          TimeRecord(std::vector<double>(100, 40.0), m.sample_rate));
        for (double v : y.samples)
            CHECK(v == 0.0);
        CHECK(error_kind([&] {
                  (void)simulate_lpv(m, TimeRecord(std::vector<double>(10, 0.0), 1.0),
                                     TimeRecord(std::vector<double>(9, 40.0), 1.0));
              }) == ErrorKind::InvalidArgument);
        CHECK(error_kind([&] {
                  (void)simulate_lpv(m, TimeRecord(std::vector<double>(2, 0.0), 1.0),
                                     TimeRecord(std::vector<double>{40.0, 60.0}, 1.0));
              }) == ErrorKind::OutOfRange);
        CHECK(error_kind([&] { (void)frozen_tf(m, 29.0); }) == ErrorKind::OutOfRange);
    }

    TEST_CASE("experiments are deterministic in the seed") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        ExperimentOptions opt;
        opt.n_samples = 4096;
        opt.warmup = 256;
        opt.seed = 9;
        const RationalTf k0 = default_controller0(m.sample_rate);
        const Experiment a = generate_experiment(m, k0, 40.0, opt);
        const Experiment b = generate_experiment(m, k0, 40.0, opt);
        CHECK(a.y.samples == b.y.samples);
        CHECK(a.u_g.samples == b.u_g.samples);
        opt.seed = 10;
        const Experiment c = generate_experiment(m, k0, 40.0, opt);
        CHECK(a.d.samples != c.d.samples);
        CHECK(a.y.size() == 4096);
    }

    TEST_CASE("an initial controller that does not stabilize is refused") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        ExperimentOptions opt;
        opt.n_samples = 128;
        CHECK(error_kind([&] { (void)generate_experiment(m, RationalTf::gain(0.0, 200.0), 40.0, opt); }) ==
              ErrorKind::Unstable);
    }

    TEST_CASE("closed-loop experiment plus ETFE recovers the frozen plant within 5%") {
        const auto m = LpvSurrogateModel::surrogate_v1();
        const RationalTf k0 = default_controller0(m.sample_rate);
        const auto grid = make_grid(FrequencyGrid::linear(0.01 * std::numbers::pi, 0.8 * std::numbers::pi, 200,
                                                          m.sample_rate));
        EstimationOptions opt;
        opt.experiment.seed = 3;
        for (double p : {30.0, 50.0}) {
            const EstimatedPoint est = estimate_point(m, k0, p, grid, opt);
            const FrfResponse ref = frozen_frf(m, p, *grid);
            double worst = 0.0;
            for (size_t k = 0; k < grid->size(); ++k)
                worst = std::max(worst, std::abs(est.plant[k] - ref[k]) / std::abs(ref[k]));
            CHECK(worst < 0.05);
        }
    }

    TEST_CASE("the shipped model file equals the built-in surrogate") {
        const auto a = LpvSurrogateModel::load(fdlpv::test::source_path("config/surrogate_v1.json"));
        const auto b = LpvSurrogateModel::surrogate_v1();
        CHECK(a.a0 == b.a0);
        CHECK(a.a1 == b.a1);
        CHECK(a.b == b.b);
        CHECK(a.c == b.c);
        CHECK(a.sample_rate == b.sample_rate);
        CHECK(a.p_min == b.p_min);
        CHECK(a.p_max == b.p_max);
        CHECK(error_kind([] { (void)LpvSurrogateModel::load("/nonexistent/model.json"); }) == ErrorKind::Io);
    }

    TEST_CASE("trace CSV layout") {
        Trace t;
        t.sample_rate = 2.0;
        t.resize(3);
        t.y[2] = 1.5;
        const std::string csv = t.to_csv();
        CHECK(csv.rfind("t,r,e,u,d,y,p\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
        CHECK(csv.find("1,0,0,0,0,1.5,0") != std::string::npos);
    }
}
