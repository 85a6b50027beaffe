#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace vrt;

namespace {

// Independent envelope oracle: scan a fine grid for the optimizing scalar.
double envelope_grid_oracle(std::span<const double> x, const CertainFunction& phi,
                            const ConeOrder& order) {
    const double step = 1e-4;
    std::vector<double> az(order.dim);
    auto scaled = [&](double a) {
        for (std::size_t j = 0; j < order.dim; ++j) az[j] = a * order.z[j];
        return std::span<const double>(az);
    };
    if (eval_certain(phi, x) >= 0.0) {
        for (double a = -40.0; a <= 40.0; a += step)
            if (cone_leq(x, scaled(a), order, 1e-9)) return a;
    } else {
        for (double a = 40.0; a >= -40.0; a -= step)
            if (cone_leq(scaled(a), x, order, 1e-9)) return a;
    }
    FAIL("grid oracle found no optimizing scalar");
    return 0.0;
}

}  // namespace

TEST_CASE("eval_certain hand values", "[certain]") {
    REQUIRE(eval_certain(CertainFunction::weighted_sum({1.0, 1.0}), std::vector<double>{1.0, 2.0}) ==
            3.0);
    REQUIRE(eval_certain(CertainFunction::max_component(), std::vector<double>{-1.0, 5.0, 2.0}) ==
            5.0);
    // shortfall w=(1,0), beta=2, k=1 at x=(3,0): 3 + 2((3-1)_+ + (0-1)_+) = 7
    REQUIRE(eval_certain(CertainFunction::shortfall({1.0, 0.0}, 2.0, 1.0),
                         std::vector<double>{3.0, 0.0}) == 7.0);
    REQUIRE_THROWS_AS(
        eval_certain(CertainFunction::weighted_sum({1.0, 1.0}), std::vector<double>{1.0}),
        dimension_mismatch);
    REQUIRE_THROWS_AS(CertainFunction::weighted_sum({0.0, 0.0}), validation_error);
    REQUIRE_THROWS_AS(CertainFunction::weighted_sum({-1.0, 2.0}), validation_error);
}

TEST_CASE("apply_pointwise lifts rows", "[certain]") {
    const RandomEconomy f(2, 2, {1.0, 2.0, 3.0, 4.0});
    const RandomVariable sums = apply_pointwise(CertainFunction::weighted_sum({1.0, 1.0}), f);
    REQUIRE(sums.values == std::vector<double>{3.0, 7.0});

    const RandomEconomy g(2, 2, {1.0, 5.0, 2.0, 0.0});
    const RandomVariable maxes = apply_pointwise(CertainFunction::max_component(), g);
    REQUIRE(maxes.values == std::vector<double>{5.0, 2.0});

    const std::vector<double> x{0.5, -1.5};
    const RandomEconomy constant = RandomEconomy::constant(3, x);
    const RandomVariable lifted = apply_pointwise(CertainFunction::max_component(), constant);
    REQUIRE(lifted.values == std::vector<double>(3, 0.5));
}

TEST_CASE("apply_pointwise commutes with atom permutations", "[certain]") {
    Rng rng(31);
    const auto phi = CertainFunction::shortfall({1.0, 0.5, 0.25}, 1.5, 0.5);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 6;
        const RandomEconomy f = random_economy(rng, n, 3);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);

        RandomEconomy permuted(n, 3);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j) permuted(i, j) = f(perm[i], j);

        const RandomVariable direct = apply_pointwise(phi, f);
        const RandomVariable after = apply_pointwise(phi, permuted);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(after[i] == direct[perm[i]]);
    }
}

TEST_CASE("transfer hand values", "[certain]") {
    const ConeOrder plane = ConeOrder::orthant(2);
    REQUIRE(transfer(CertainFunction::weighted_sum({1.0, 1.0}), 3.0, plane) == 6.0);
    REQUIRE(transfer(CertainFunction::max_component(), -2.0, plane) == -2.0);
    REQUIRE(transfer(CertainFunction::shortfall({1.0, 1.0}, 1.0, 0.0), 2.0, plane) == 8.0);
}

TEST_CASE("invert_transfer hand values and round trip", "[certain]") {
    const ConeOrder plane = ConeOrder::orthant(2);
    REQUIRE(std::abs(invert_transfer(CertainFunction::weighted_sum({1.0, 1.0}), 6.0, plane) - 3.0) <
            1e-10);
    REQUIRE(std::abs(invert_transfer(CertainFunction::max_component(), -2.0, plane) + 2.0) < 1e-10);
    REQUIRE(std::abs(invert_transfer(CertainFunction::shortfall({1.0, 1.0}, 1.0, 0.0), 8.0, plane) -
                     2.0) < 1e-10);

    Rng rng(32);
    for (const auto& phi : catalog_certain(2)) {
        for (int t = 0; t < 1000; ++t) {
            const double a = rng.normal(10.0);
            const double back = invert_transfer(phi, transfer(phi, a, plane), plane);
            REQUIRE(std::abs(back - a) < 1e-9);

            const double b = a + std::abs(rng.normal(5.0)) + 1e-6;
            REQUIRE(transfer(phi, a, plane) < transfer(phi, b, plane));
        }
    }
}

TEST_CASE("invert_transfer failure modes", "[certain]") {
    const ConeOrder plane = ConeOrder::orthant(2);
    const auto flat = CertainFunction::custom(
        [](std::span<const double> x) { return std::min(1.0, std::max(-1.0, x[0])); }, "clamp");
    REQUIRE_THROWS_AS(invert_transfer(flat, 1.0, plane), not_invertible);
    REQUIRE(std::abs(invert_transfer(flat, 0.5, plane) - 0.5) < 1e-9);

    const auto bounded = CertainFunction::custom(
        [](std::span<const double> x) {
            const double s = x[0] + x[1];
            return s * s;
        },
        "square");
    REQUIRE_THROWS_AS(invert_transfer(bounded, -1.0, plane), bracketing_failure);
}

TEST_CASE("scalar envelope on the orthant", "[certain]") {
    const ConeOrder plane = ConeOrder::orthant(2);
    const auto sum = CertainFunction::weighted_sum({1.0, 1.0});

    const RandomEconomy f(1, 2, {1.0, 3.0});  // phi = 4 >= 0
    const RandomVariable Z = scalar_envelope(f, sum, plane);
    REQUIRE(Z[0] == 3.0);
    REQUIRE(transfer(sum, Z[0], plane) >= 4.0);

    const RandomEconomy g(1, 2, {-2.0, -2.0});  // phi = -4 < 0, already on the ray
    const RandomVariable Zg = scalar_envelope(g, sum, plane);
    REQUIRE(Zg[0] == -2.0);
    REQUIRE(transfer(sum, Zg[0], plane) == -4.0);

    const RandomEconomy h = RandomEconomy::constant(3, std::vector<double>{2.5, 2.5});
    const RandomVariable Zh = scalar_envelope(h, sum, plane);
    REQUIRE(Zh.values == std::vector<double>(3, 2.5));
}

TEST_CASE("scalar envelope matches the grid oracle on a non-orthant cone", "[certain]") {
    Rng rng(33);
    const ConeOrder wedge(2, {1.0, 0.0, 0.5, 1.0}, {1.0, 1.0});
    for (const auto& phi : catalog_certain(2)) {
        for (int t = 0; t < 25; ++t) {
            const RandomEconomy f = random_economy(rng, 3, 2, 3.0);
            const RandomVariable Z = scalar_envelope(f, phi, wedge);
            for (std::size_t i = 0; i < 3; ++i)
                REQUIRE(std::abs(Z[i] - envelope_grid_oracle(f.row(i), phi, wedge)) < 2e-4);
        }
    }

    // the per-atom domination inequalities need phi monotone w.r.t. the
    // wedge, i.e. weights in the dual cone; (1,1) = 0.5(1,0) + 1(0.5,1)
    const auto dual_feasible = CertainFunction::weighted_sum({1.0, 1.0});
    for (int t = 0; t < 50; ++t) {
        const RandomEconomy f = random_economy(rng, 3, 2, 3.0);
        const RandomVariable Z = scalar_envelope(f, dual_feasible, wedge);
        for (std::size_t i = 0; i < 3; ++i) {
            const double value = eval_certain(dual_feasible, f.row(i));
            const double dominated = transfer(dual_feasible, Z[i], wedge);
            if (value >= 0.0) {
                REQUIRE(value <= dominated + 1e-12);
            } else {
                REQUIRE(dominated <= value + 1e-12);
            }
        }
    }
}

TEST_CASE("scalar envelope inequalities hold for the catalog on the orthant", "[certain]") {
    Rng rng(35);
    const ConeOrder plane = ConeOrder::orthant(3);
    for (const auto& phi : catalog_certain(3)) {
        for (int t = 0; t < 200; ++t) {
            const RandomEconomy f = random_economy(rng, 4, 3, 4.0);
            const RandomVariable Z = scalar_envelope(f, phi, plane);
            for (std::size_t i = 0; i < 4; ++i) {
                const double value = eval_certain(phi, f.row(i));
                const double dominated = transfer(phi, Z[i], plane);
                if (value >= 0.0) {
                    REQUIRE(value <= dominated + 1e-12);
                } else {
                    REQUIRE(dominated <= value + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("lemma bound holds for the catalog", "[certain]") {
    Rng rng(34);
    const ConeOrder order = ConeOrder::orthant(3);
    for (double p : {1.0, 2.0, kInf}) {
        for (const auto& phi : catalog_certain(3)) {
            for (int t = 0; t < 200; ++t) {
                const FiniteSpace sp = random_space(rng, 5);
                const RandomEconomy f = random_economy(rng, 5, 3, 4.0);
                std::vector<double> exps(5);
                for (auto& e : exps) e = rng.uniform(1.0, 4.0);
                REQUIRE(check_lemma_bound(phi, f, Exponent(exps, p), sp, order));
            }
        }
    }

    // exact multiples of z give equality of both sides
    const ConeOrder plane = ConeOrder::orthant(2);
    const FiniteSpace sp = uniform_space(2);
    const auto sum = CertainFunction::weighted_sum({1.0, 1.0});
    const RandomEconomy ray(2, 2, {1.5, 1.5, -2.0, -2.0});
    const RandomVariable Z = scalar_envelope(ray, sum, plane);
    const RandomVariable lifted = apply_pointwise(sum, ray);
    for (std::size_t i = 0; i < 2; ++i) REQUIRE(transfer(sum, Z[i], plane) == lifted[i]);
    REQUIRE(check_lemma_bound(sum, ray, Exponent::constant(2, 2.0, 2.0), sp, plane));

    const RandomEconomy zero(2, 2);
    REQUIRE(check_lemma_bound(sum, zero, Exponent::constant(2, 2.0, 1.0), sp, plane));
}

TEST_CASE("certain axiom suite accepts the catalog", "[certain]") {
    const ConeOrder order = ConeOrder::orthant(3);
    for (const auto& phi : catalog_certain(3)) {
        const AxiomReport report = check_certain_axioms(phi, order, 400, 91);
        INFO(report.subject);
        REQUIRE(report.all_passed());
    }
    const AxiomReport weighted =
        check_certain_axioms(CertainFunction::weighted_sum({1.0, 2.0}), ConeOrder::orthant(2), 400, 92);
    REQUIRE(weighted.all_passed());
}

TEST_CASE("certain axiom suite rejects a squared linear aggregator", "[certain]") {
    const auto square = CertainFunction::custom(
        [](std::span<const double> x) {
            const double s = x[0] + 2.0 * x[1];
            return s * s;
        },
        "square_of_linear");
    const AxiomReport report = check_certain_axioms(square, ConeOrder::orthant(2), 400, 93);
    REQUIRE_FALSE(report.all_passed());
    REQUIRE(report.find("convexity")->passed);
    REQUIRE_FALSE(report.find("monotonicity")->passed);
    REQUIRE(report.find("monotonicity")->witness.has_value());
    REQUIRE_FALSE(report.find("surjectivity")->passed);  // bounded below
}

TEST_CASE("certain axiom suite rejects the concave min aggregator", "[certain]") {
    const AxiomReport report =
        check_certain_axioms(controls::min_component_aggregator(), ConeOrder::orthant(3), 400, 94);
    REQUIRE(report.find("monotonicity")->passed);
    REQUIRE_FALSE(report.find("convexity")->passed);
    REQUIRE(report.find("convexity")->witness.has_value());
    REQUIRE(report.find("surjectivity")->passed);
}
