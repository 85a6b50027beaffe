#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace vrt;

TEST_CASE("acceptance membership hand values", "[duality]") {
    const FiniteSpace sp = uniform_space(2);
    const auto expectation = SimpleRiskMeasure::expectation();
    REQUIRE(acceptance_contains_simple({2.0, RandomVariable({1.0, 3.0})}, expectation, sp));
    REQUIRE_FALSE(acceptance_contains_simple({1.9, RandomVariable({1.0, 3.0})}, expectation, sp));
    for (const auto& rho : catalog_simple())
        for (double a : {-4.0, 0.0, 2.5})
            REQUIRE(acceptance_contains_simple({a, RandomVariable::constant(2, a)}, rho, sp));

    const auto sum = CertainFunction::weighted_sum({1.0, 1.0});
    const RandomEconomy f(2, 2, {1.0, 2.0, 0.0, 0.0});
    REQUIRE(acceptance_contains_certain({RandomVariable({3.0, 0.0}), f}, sum, sp));
    REQUIRE_FALSE(acceptance_contains_certain({RandomVariable({3.0, -1.0}), f}, sum, sp));
    REQUIRE(acceptance_contains_certain({RandomVariable({3.5, 0.25}), f}, sum, sp));
}

TEST_CASE("acceptance-set structure holds for catalog pairs", "[duality]") {
    Rng rng(61);
    const FiniteSpace sp = random_space(rng, 5);
    const ConeOrder order = ConeOrder::orthant(3);
    for (const auto& phi : catalog_certain(3)) {
        for (const auto& rho_s : catalog_simple()) {
            const AxiomReport report = check_acceptance_properties(phi, rho_s, sp, order, 200, 110);
            INFO(report.subject);
            REQUIRE(report.all_passed());
        }
    }
}

TEST_CASE("acceptance-set convexity fails for a non-convex measure", "[duality]") {
    const FiniteSpace sp = uniform_space(4);
    const ConeOrder order = ConeOrder::orthant(2);
    const auto concave_rho = SimpleRiskMeasure::custom(
        [](const RandomVariable& X, const FiniteSpace& s) {
            double mean = 0.0;
            for (std::size_t i = 0; i < X.size(); ++i) mean += s.probs[i] * X.values[i];
            return -std::abs(mean);  // concave kink at E[X] = 0
        },
        "negative_abs_mean");
    const AxiomReport report = check_acceptance_properties(
        CertainFunction::weighted_sum({1.0, 1.0}), concave_rho, sp, order, 500, 111);
    REQUIRE_FALSE(report.find("simple_set_convexity")->passed);
    REQUIRE(report.find("simple_set_convexity")->witness.has_value());
}

TEST_CASE("primal value equals the composition and survives verification", "[duality]") {
    const FiniteSpace sp = uniform_space(2);
    const auto sum = CertainFunction::weighted_sum({1.0, 1.0});
    const auto expectation = SimpleRiskMeasure::expectation();
    const RandomEconomy f(2, 2, {1.0, 2.0, 3.0, 4.0});
    REQUIRE(primal_value(f, sum, expectation, sp, 1000) == 5.0);
    REQUIRE(primal_value(f, sum, expectation, sp) ==
            eval_systemic(compose(expectation, sum), f, sp));

    Rng rng(62);
    for (const auto& phi : catalog_certain(3)) {
        for (const auto& rho_s : catalog_simple()) {
            const FiniteSpace rsp = random_space(rng, 6);
            const RandomEconomy g = random_economy(rng, 6, 3, 3.0);
            REQUIRE(primal_value(g, phi, rho_s, rsp, 200) ==
                    eval_systemic(compose(rho_s, phi), g, rsp));
        }
    }
}

TEST_CASE("sampled penalty vanishes for the matched linear pair", "[duality]") {
    const FiniteSpace sp = uniform_space(3);
    const std::vector<double> w{1.0, 2.0};
    const auto phi = CertainFunction::weighted_sum(w);
    const auto expectation = SimpleRiskMeasure::expectation();
    Rng rng(63);
    const std::vector<RandomEconomy> anchors{random_economy(rng, 3, 2)};

    const RandomVariable yhat = RandomVariable::constant(3, 1.0);
    const RandomEconomy fhat = RandomEconomy::constant(3, w);
    const PenaltySample alpha =
        penalty_alpha_sampled(yhat, fhat, phi, expectation, anchors, 2000, sp, 201);
    REQUIRE_FALSE(alpha.unbounded);
    REQUIRE(std::abs(alpha.value) < 1e-9);
}

TEST_CASE("sampled penalty flags the divergent zero pair", "[duality]") {
    const FiniteSpace sp = uniform_space(3);
    const auto phi = CertainFunction::weighted_sum({1.0, 1.0});
    const auto expectation = SimpleRiskMeasure::expectation();
    const std::vector<RandomEconomy> anchors;

    const RandomVariable yhat = RandomVariable::constant(3, 0.0);
    const RandomEconomy fhat(3, 2);
    const PenaltySample alpha =
        penalty_alpha_sampled(yhat, fhat, phi, expectation, anchors, 100, sp, 202);
    REQUIRE(alpha.unbounded);
    REQUIRE(alpha.value > 1e6);
}

TEST_CASE("anchored penalty certifies the dual lower bound", "[duality]") {
    Rng rng(64);
    const FiniteSpace sp = random_space(rng, 4);
    for (const auto& phi : catalog_certain(2)) {
        for (const auto& rho_s : catalog_simple()) {
            const RandomEconomy f = random_economy(rng, 4, 2, 3.0);
            const std::vector<RandomEconomy> anchors{f};
            for (int t = 0; t < 20; ++t) {
                const RandomVariable yhat(rng.normal_vector(4, 1.0));
                const RandomEconomy fhat = random_economy(rng, 4, 2, 1.0);
                const PenaltySample alpha =
                    penalty_alpha_sampled(yhat, fhat, phi, rho_s, anchors, 200, sp, 300 + t);
                const double rho_f = eval_systemic(compose(rho_s, phi), f, sp);
                REQUIRE(dual_pairing(fhat, f, sp) - alpha.value <= rho_f + 1e-8);
            }
        }
    }
}

TEST_CASE("exact penalty hand values", "[duality]") {
    const FiniteSpace sp = uniform_space(4);
    const std::vector<double> w{1.0, 2.0};
    const auto phi = CertainFunction::weighted_sum(w);

    const RandomVariable ones = RandomVariable::constant(4, 1.0);
    const RandomEconomy matched = RandomEconomy::constant(4, w);
    REQUIRE(penalty_alpha_exact(ones, matched, phi, SimpleRiskMeasure::expectation(), sp) == 0.0);

    RandomEconomy doubled = matched;
    for (auto& v : doubled.data) v *= 2.0;
    REQUIRE(std::isinf(
        penalty_alpha_exact(ones, doubled, phi, SimpleRiskMeasure::expectation(), sp)));

    const RandomVariable es_density({0.0, 0.0, 2.0, 2.0});
    RandomEconomy es_fhat(4, 2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 2; ++j) es_fhat(i, j) = es_density[i] * w[j];
    REQUIRE(penalty_alpha_exact(es_density, es_fhat, phi,
                                SimpleRiskMeasure::expected_shortfall(0.5), sp) == 0.0);

    REQUIRE_THROWS_AS(penalty_alpha_exact(ones, matched, CertainFunction::max_component(),
                                          SimpleRiskMeasure::expectation(), sp),
                      unsupported_instance);
    REQUIRE_THROWS_AS(penalty_alpha_exact(ones, matched, phi,
                                          SimpleRiskMeasure::mean_semideviation(0.5), sp),
                      unsupported_instance);
}

TEST_CASE("sampled penalty never exceeds the exact penalty", "[duality]") {
    Rng rng(69);
    const FiniteSpace sp = random_space(rng, 4);
    const std::vector<double> w{1.0, 2.0};
    const auto phi = CertainFunction::weighted_sum(w);
    const std::vector<RandomEconomy> anchors{random_economy(rng, 4, 2)};

    for (const auto& rho_s :
         {SimpleRiskMeasure::expectation(), SimpleRiskMeasure::expected_shortfall(0.5),
          SimpleRiskMeasure::entropic(1.0)}) {
        for (int t = 0; t < 40; ++t) {
            std::vector<double> y(4);
            double mean = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                y[i] = std::abs(rng.normal()) + 0.05;
                mean += sp.probs[i] * y[i];
            }
            for (auto& v : y) v /= mean;
            const RandomVariable yhat(y);
            RandomEconomy fhat(4, 2);
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 2; ++j) fhat(i, j) = yhat[i] * w[j];

            const double exact = penalty_alpha_exact(yhat, fhat, phi, rho_s, sp);
            const PenaltySample sampled =
                penalty_alpha_sampled(yhat, fhat, phi, rho_s, anchors, 500, sp, 400 + t);
            if (std::isfinite(exact)) REQUIRE(sampled.value <= exact + 1e-8);
        }
    }

    // shortfall at level 0 only admits the unit density
    const auto es0_conj = analytic_conjugate(SimpleRiskMeasure::expected_shortfall(0.0));
    REQUIRE(es0_conj.value(RandomVariable::constant(4, 1.0), sp) == 0.0);
    REQUIRE(std::isinf(es0_conj.value(RandomVariable({1.4, 0.9, 0.9, 0.9}), sp)));
}

TEST_CASE("exact penalty is midpoint convex on feasible pairs", "[duality]") {
    Rng rng(65);
    const FiniteSpace sp = random_space(rng, 5);
    const std::vector<double> w{1.0, 0.5};
    const auto phi = CertainFunction::weighted_sum(w);
    const auto entropic = SimpleRiskMeasure::entropic(1.0);

    auto density = [&](Rng& r) {
        std::vector<double> y(5);
        double mean = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            y[i] = std::abs(r.normal()) + 0.05;
            mean += sp.probs[i] * y[i];
        }
        for (auto& v : y) v /= mean;
        return RandomVariable(y);
    };
    auto lift = [&](const RandomVariable& y) {
        RandomEconomy fhat(5, 2);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 2; ++j) fhat(i, j) = y[i] * w[j];
        return fhat;
    };

    for (int t = 0; t < 200; ++t) {
        const RandomVariable y1 = density(rng), y2 = density(rng);
        std::vector<double> ym(5);
        for (std::size_t i = 0; i < 5; ++i) ym[i] = 0.5 * (y1[i] + y2[i]);
        const RandomVariable mid(ym);
        const double a1 = penalty_alpha_exact(y1, lift(y1), phi, entropic, sp);
        const double a2 = penalty_alpha_exact(y2, lift(y2), phi, entropic, sp);
        const double am = penalty_alpha_exact(mid, lift(mid), phi, entropic, sp);
        REQUIRE(am <= 0.5 * a1 + 0.5 * a2 + 1e-8);
    }
}

TEST_CASE("exact duality closes the gap for the linear instances", "[duality]") {
    const FiniteSpace sp = uniform_space(2);
    const auto sum = CertainFunction::weighted_sum({1.0, 1.0});
    {
        const RandomEconomy f(2, 2, {1.0, 2.0, 3.0, 4.0});
        const DualityReport report = dual_value(f, {}, sum, SimpleRiskMeasure::expectation(), sp,
                                                DualMethod::exact);
        REQUIRE(report.primal == 5.0);
        REQUIRE(std::abs(report.gap) <= 1e-12);
        REQUIRE(report.maximizer.Yhat.values == std::vector<double>{1.0, 1.0});
    }
    {
        // distinct aggregated values 1,2,3,4: the shortfall maximizer puts
        // density 2 on the two worst atoms
        const FiniteSpace sp4 = uniform_space(4);
        const RandomEconomy f(4, 2, {0.5, 0.5, 1.0, 1.0, 1.5, 1.5, 2.0, 2.0});
        const DualityReport report =
            dual_value(f, {}, sum, SimpleRiskMeasure::expected_shortfall(0.5), sp4,
                       DualMethod::exact);
        REQUIRE(report.primal == 3.5);
        REQUIRE(std::abs(report.gap) <= 1e-6);
        REQUIRE(report.maximizer.Yhat.values == std::vector<double>{0.0, 0.0, 2.0, 2.0});
    }

    Rng rng(66);
    for (const auto& rho_s :
         {SimpleRiskMeasure::expectation(), SimpleRiskMeasure::expected_shortfall(0.5),
          SimpleRiskMeasure::entropic(1.0)}) {
        for (int t = 0; t < 60; ++t) {
            const FiniteSpace rsp = random_space(rng, 8);
            const RandomEconomy f = random_economy(rng, 8, 3, 3.0);
            const auto phi = CertainFunction::weighted_sum({1.0, 0.5, 1.5});
            const DualityReport report = dual_value(f, {}, phi, rho_s, rsp, DualMethod::exact);
            REQUIRE(report.gap <= 1e-6);
            REQUIRE(report.gap >= -1e-8);
        }
    }
}

TEST_CASE("sampled duality is weak for every catalog pair", "[duality]") {
    Rng rng(67);
    const FiniteSpace sp = random_space(rng, 5);
    for (const auto& phi : catalog_certain(2)) {
        for (const auto& rho_s : catalog_simple()) {
            const RandomEconomy f = random_economy(rng, 5, 2, 3.0);
            const std::vector<DualPair> cloud = make_candidate_cloud(phi, rho_s, f, 50, sp, 203);
            REQUIRE(cloud.size() == 50);
            const DualityReport report =
                dual_value(f, cloud, phi, rho_s, sp, DualMethod::sampled, 2000, 204);
            REQUIRE(report.gap >= -1e-8);
            REQUIRE(report.dual <= report.primal + 1e-8);
        }
    }
}

TEST_CASE("sampled duality is tight for the matched linear expectation pair", "[duality]") {
    Rng rng(68);
    const FiniteSpace sp = random_space(rng, 4);
    const auto phi = CertainFunction::weighted_sum({1.0, 2.0});
    const auto expectation = SimpleRiskMeasure::expectation();
    const RandomEconomy f = random_economy(rng, 4, 2, 2.0);
    const std::vector<DualPair> cloud = make_candidate_cloud(phi, expectation, f, 10, sp, 205);
    const DualityReport report = dual_value(f, cloud, phi, expectation, sp, DualMethod::sampled,
                                            4000, 206);
    // candidate 0 is the unit density with fhat = w, the true maximizer
    REQUIRE(std::abs(report.gap) <= 1e-8);
}
