#include <doctest.h>

#include <complex>
#include <random>

#include "birkhoff/series.hpp"
#include "birkhoff/series_io.hpp"
#include "support.hpp"

using namespace birkhoff;
using namespace testing_support;

namespace {

ExactScalar q(long p, long r = 1) { return make_real<ExactScalar>(Rational(p, r)); }

FrequencyVector<ExactScalar> exact_omega(std::vector<Rational> w, std::vector<IntVector> lat = {})
{
    return FrequencyVector<ExactScalar>(std::move(w), std::move(lat));
}

ESeries bare_saddle(int k, int l, int order)
{
    ESeries s(2, order);
    s.add_term(Monomial({k, l}, {0, 0}), q(1));
    s.add_term(Monomial({0, 0}, {k, l}), q(1));
    s.mark_real();
    return s;
}

using CPoint = std::vector<std::complex<double>>;

std::complex<double> eval_poly(const oracle::Poly &p, const CPoint &z)
{
    std::complex<double> acc = 0;
    for (const auto &[e, c] : p) {
        std::complex<double> t(c.re.get_d(), c.im.get_d());
        for (std::size_t s = 0; s < e.size(); ++s)
            for (int k = 0; k < e[s]; ++k) t *= z[s];
        acc += t;
    }
    return acc;
}

// Time-1 flow of chi by classical RK4 on (xi, eta) treated as independent complex variables.
CPoint flow(const oracle::Poly &chi, int d, CPoint z, int steps)
{
    std::vector<oracle::Poly> dchi;
    for (int s = 0; s < 2 * d; ++s) dchi.push_back(oracle::diff(chi, static_cast<std::size_t>(s)));
    const std::complex<double> I(0, 1);
    auto field = [&](const CPoint &w) {
        CPoint f(w.size());
        for (int j = 0; j < d; ++j) {
            f[static_cast<std::size_t>(j)] = -I * eval_poly(dchi[static_cast<std::size_t>(d + j)], w);
            f[static_cast<std::size_t>(d + j)] = I * eval_poly(dchi[static_cast<std::size_t>(j)], w);
        }
        return f;
    };
    const double h = 1.0 / steps;
    for (int n = 0; n < steps; ++n) {
        auto k1 = field(z);
        CPoint w(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] + 0.5 * h * k1[i];
        auto k2 = field(w);
        for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] + 0.5 * h * k2[i];
        auto k3 = field(w);
        for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] + h * k3[i];
        auto k4 = field(w);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return z;
}

} // namespace

TEST_CASE("monomial basics")
{
    const Monomial m({2, 0}, {0, 1});
    CHECK(m.degree() == 3);
    CHECK_FALSE(m.is_action());
    CHECK(Monomial::action(2, 1, 2).is_action());
    CHECK(m.to_string() == "xi1^2*eta2");
    CHECK(m.conjugate() == Monomial({0, 1}, {2, 0}));
    CHECK_THROWS_AS(Monomial({1}, {1, 2}), DimensionError);
    CHECK(GradedLex{}(Monomial({1, 0}, {0, 0}), Monomial({1, 1}, {0, 0})));
    CHECK(GradedLex{}(Monomial({2, 0}, {0, 0}), Monomial({1, 1}, {0, 0})));
}

TEST_CASE("frequency pairing")
{
    SUBCASE("action monomial is resonant")
    {
        const auto w = exact_omega({Rational(1), Rational(3, 7)});
        auto p = frequency_pairing(Monomial::action(2, 0) * Monomial::action(2, 1), w);
        CHECK(p.pairing == 0);
        CHECK(p.resonance == Resonance::resonant);
    }
    SUBCASE("declared relation")
    {
        const auto w = exact_omega({Rational(2), Rational(-1)}, {{1, 2}});
        auto p = frequency_pairing(Monomial({1, 2}, {0, 0}), w);
        CHECK(p.pairing == 0);
        CHECK(p.resonance == Resonance::resonant);
        CHECK(frequency_pairing(Monomial({2, 4}, {0, 0}), w).resonance == Resonance::resonant);
        CHECK(frequency_pairing(Monomial({0, 0}, {1, 2}), w).resonance == Resonance::resonant);
        CHECK(frequency_pairing(Monomial({2, 1}, {0, 0}), w).resonance == Resonance::nonresonant);
    }
    SUBCASE("float omega, empty lattice")
    {
        FrequencyVector<FloatScalar> w({Real(1), boost::multiprecision::sqrt(Real(2))});
        auto p = frequency_pairing(Monomial({1, 0}, {0, 1}), w);
        CHECK(p.resonance == Resonance::nonresonant);
        CHECK(ScalarTraits<FloatScalar>::to_double(p.pairing) == doctest::Approx(-0.414214).epsilon(1e-6));
    }
    SUBCASE("rejections")
    {
        CHECK_THROWS_AS(frequency_pairing(Monomial(3), exact_omega({Rational(1), Rational(2)})), DimensionError);
        CHECK_THROWS(exact_omega({Rational(2), Rational(-1)}, {{1, 1}}));
        CHECK_THROWS(exact_omega({Rational(2), Rational(-1)}, {{0, 0}}));
    }
    SUBCASE("lattice membership needs integer combinations")
    {
        const IntegerLattice lat(2, {{2, 4}});
        CHECK(lat.contains({4, 8}));
        CHECK_FALSE(lat.contains({1, 2}));
        const IntegerLattice lat3(3, {{1, 2, 0}, {0, 3, 1}});
        CHECK(lat3.contains({1, 5, 1}));
        CHECK(lat3.contains({2, 1, -1}));
        CHECK_FALSE(lat3.contains({1, 0, 0}));
    }
}

TEST_CASE("series_combine")
{
    std::mt19937_64 rng(7);
    const auto a = random_real_series(rng, 2, 1, 4, 6, 6);
    CHECK(add(a, scale(a, q(-1), 6), 6).empty());

    ESeries i1(2, 4), i2(2, 4);
    i1.add_term(Monomial::action(2, 0), q(1));
    i2.add_term(Monomial::action(2, 1), q(1));
    const auto p = series_combine(CombineMode::multiply, i1, std::variant<ESeries, ExactScalar>(i2), 4);
    CHECK(p.size() == 1);
    CHECK(p.coefficient(Monomial({1, 1}, {1, 1})) == q(1));

    ESeries x(1, 3);
    x.add_term(Monomial::xi(1, 0, 2), q(1));
    CHECK(multiply(x, x, 3).empty());

    i1.mark_real();
    i2.mark_real();
    CHECK(multiply(i1, i2, 4).reality_flag());
    CHECK(scale(i1, q(3), 4).reality_flag());
    CHECK_FALSE(scale(i1, ExactScalar(0, 1), 4).reality_flag());
    CHECK_THROWS_AS(add(i1, ESeries(3, 4), 4), DimensionError);
}

TEST_CASE("poisson bracket against the derivative oracle")
{
    ESeries i1(2, 6), i2(2, 6);
    i1.add_term(Monomial::action(2, 0), q(1));
    i2.add_term(Monomial::action(2, 1), q(1));
    CHECK(poisson_bracket(i1, i2, 6).empty());

    const auto w = exact_omega({Rational(3, 2), Rational(-5, 7)});
    const auto hw = ESeries::quadratic(6, w);
    ESeries xi1(2, 6);
    xi1.add_term(Monomial::xi(2, 0), q(1));
    // sigma * (-i) * omega_1 * xi_1 with sigma = -1
    const auto b = poisson_bracket(hw, xi1, 6);
    CHECK(b.size() == 1);
    CHECK(b.coefficient(Monomial::xi(2, 0)) == ExactScalar(0, Rational(3, 2)) * make_real<ExactScalar>(-bracket_convention));

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 2;
        const auto f = random_real_series(rng, d, 2, 5, 5, 8);
        const auto g = random_real_series(rng, d, 2, 5, 5, 8);
        CHECK(same(poisson_bracket(f, g, 8), oracle::bracket(to_poly(f), to_poly(g), d, 8)));
    }
}

TEST_CASE("bracket with H_omega acts diagonally")
{
    std::mt19937_64 rng(3);
    const auto w = exact_omega({Rational(2, 3), Rational(-7, 5), Rational(1, 9)});
    const auto hw = ESeries::quadratic(10, w);
    std::uniform_int_distribution<int> e(0, 3);
    for (int t = 0; t < 30; ++t) {
        const Monomial m({e(rng), e(rng), e(rng)}, {e(rng), e(rng), e(rng)});
        ESeries g(3, 10);
        g.add_term(m, ExactScalar(Rational(e(rng) + 1), Rational(-e(rng))));
        const auto b = poisson_bracket(hw, g, 10);
        const Rational pair = -w.dot(m.exchange()); // <omega, v - u>
        const ExactScalar expect = (g.coefficient(m) * make_real<ExactScalar>(pair)).times_i() *
                                   make_real<ExactScalar>(bracket_convention);
        if (pair == 0)
            CHECK(b.empty());
        else
            CHECK(b.coefficient(m) == expect);
    }
}

TEST_CASE("elimination identity of a single monomial")
{
    const auto w = exact_omega({Rational(1), Rational(-21, 10)});
    const Monomial m({2, 1}, {0, 0});
    const Rational pair = w.dot(m.exchange());
    ESeries chi(2, 6);
    chi.add_term(m, ExactScalar(0, 1) / make_real<ExactScalar>(pair));
    const auto b = poisson_bracket(ESeries::quadratic(6, w), chi, 6);
    CHECK(b.size() == 1);
    CHECK(b.coefficient(m) == q(-1));

    auto h = add(ESeries::quadratic(6, w), bare_saddle(2, 1, 6), 6);
    chi.add_term(m.conjugate(), ExactScalar(0, 1) / make_real<ExactScalar>(-pair));
    const auto t = lie_transform(h, chi, 6);
    CHECK(t.coefficient(m).is_zero());
    CHECK(t.coefficient(m.conjugate()).is_zero());
    for (const auto &[mono, c] : t.terms()) CHECK((mono.degree() == 2 || mono.degree() > 3));
}

TEST_CASE("lie transform")
{
    std::mt19937_64 rng(5);
    const auto h = random_real_series(rng, 2, 2, 5, 6, 6);
    CHECK(lie_transform(h, ESeries(2, 6), 6) == h);

    ESeries quad(2, 6);
    quad.add_term(Monomial::action(2, 0), q(1));
    CHECK_THROWS_AS(lie_transform(h, quad, 6), GeneratorError);

    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_real_series(rng, 2, 2, 6, 6, 6);
        const auto chi = random_real_series(rng, 2, 3, 4, 3, 6);
        int it = 0;
        const auto mine = lie_transform(f, chi, 6, &it);
        CHECK(it <= 6);
        CHECK(same(mine, oracle::lie(to_poly(f), to_poly(chi), 2, 6)));
    }
}

TEST_CASE("lie transform matches the time-1 flow numerically")
{
    const int d = 2, order = 5;
    ESeries h(d, order), chi(d, order);
    h.add_term(Monomial::action(d, 0), q(1));
    h.add_term(Monomial::action(d, 1), q(-3, 2));
    h.add_term(Monomial({1, 1}, {1, 0}), q(1, 2));
    h.add_term(Monomial({1, 0}, {1, 1}), q(1, 2));
    chi.add_term(Monomial({2, 1}, {0, 0}), ExactScalar(0, Rational(1, 3)));
    chi.add_term(Monomial({0, 0}, {2, 1}), ExactScalar(0, Rational(-1, 3)));
    const auto transformed = to_poly(lie_transform(h, chi, order));
    const auto hp = to_poly(h), cp = to_poly(chi);

    auto error_at = [&](double eps) {
        const CPoint z{{0.7 * eps, 0.2 * eps}, {-0.3 * eps, 0.5 * eps}, {0.7 * eps, -0.2 * eps}, {-0.3 * eps, -0.5 * eps}};
        const auto z1 = flow(cp, d, z, 400);
        return std::abs(eval_poly(transformed, z) - eval_poly(hp, z1));
    };
    const double e1 = error_at(0.02), e2 = error_at(0.01);
    // The truncation error is O(|z|^{N+1}); halving |z| should divide it by ~2^6.
    CHECK(e1 < 1e-9);
    CHECK(e1 / e2 > 0.5 * std::pow(2.0, order + 1));
}

TEST_CASE("split_resonant")
{
    const auto empty = exact_omega({Rational(1), Rational(-21, 10)});
    std::mt19937_64 rng(9);
    const auto h = random_real_series(rng, 2, 2, 6, 8, 6);
    auto [res, non] = split_resonant(h, empty);
    CHECK(res == h.action_part());
    CHECK(add(res, non, 6) == h);
    auto [res2, non2] = split_resonant(res, empty);
    CHECK(res2 == res);
    CHECK(non2.empty());

    auto [r3, n3] = split_resonant(bare_saddle(2, 1, 3), empty);
    CHECK(r3.empty());
    CHECK(n3 == bare_saddle(2, 1, 3));

    const auto resonant = exact_omega({Rational(2), Rational(-1)}, {{1, 2}});
    auto [r4, n4] = split_resonant(bare_saddle(1, 2, 3), resonant);
    CHECK(r4 == bare_saddle(1, 2, 3));
    CHECK(n4.empty());
}

TEST_CASE("evaluate")
{
    using F = FloatScalar;
    FrequencyVector<F> w({Real(1), Real("-2.1")});
    const auto hw = Series<F>::quadratic(4, w);
    const auto z = phase_point_from_real<F>({Real("0.3"), Real("-0.2"), Real("0.1"), Real("0.4")});
    const auto ev = evaluate(hw, z);
    const double i1 = (0.09 + 0.04) / 2, i2 = (0.01 + 0.16) / 2;
    CHECK(ScalarTraits<F>::to_double(ev.value.re) == doctest::Approx(i1 - 2.1 * i2));
    CHECK(ev.value.im == 0);
    for (int j = 0; j < 2; ++j) {
        const F expect = (z.xi[static_cast<std::size_t>(j)] * make_real<F>(w[j])).times_i();
        CHECK(ScalarTraits<F>::to_double(ev.xi_dot[static_cast<std::size_t>(j)].re + expect.re) == doctest::Approx(0).epsilon(1e-30));
        CHECK(ScalarTraits<F>::to_double(ev.xi_dot[static_cast<std::size_t>(j)].im + expect.im) == doctest::Approx(0).epsilon(1e-30));
        CHECK(ev.eta_dot[static_cast<std::size_t>(j)] == ev.xi_dot[static_cast<std::size_t>(j)].conj());
    }
    CHECK_THROWS_AS(evaluate(hw, phase_point_from_real<F>({Real(1), Real(1)})), DimensionError);
}

TEST_CASE("field of the saddle on the invariant line")
{
    // On xi_1 = r e^{2 pi i nu}, xi_2 = u r e^{2 pi i nu'} with k nu + l nu' = 3/4 the
    // radial speed of F_{k,l} along the line is k u^l r^alpha.
    using F = FloatScalar;
    const int k = 1, l = 2;
    Series<F> f(2, 3);
    f.add_term(Monomial({k, l}, {0, 0}), make_real<F>(Real(1)));
    f.add_term(Monomial({0, 0}, {k, l}), make_real<F>(Real(1)));
    const Real u = boost::multiprecision::sqrt(Real(l) / Real(k));
    const Real r("0.37");
    const Real nu = Real(3) / Real(4 * (k + l));
    const Real th = 2 * boost::math::constants::pi<Real>() * nu;
    PhasePoint<F> z;
    const F e(boost::multiprecision::cos(th), boost::multiprecision::sin(th));
    z.xi = {e * make_real<F>(r), e * make_real<F>(u * r)};
    z.eta = {z.xi[0].conj(), z.xi[1].conj()};
    const auto ev = evaluate(f, z);
    // radial component of xi_1' along e
    const F radial = ev.xi_dot[0] * e.conj();
    const Real expect = k * boost::multiprecision::pow(u, l) * boost::multiprecision::pow(r, k + l - 1);
    CHECK(ScalarTraits<F>::to_double(radial.re / expect) == doctest::Approx(1.0).epsilon(1e-30));
    CHECK(ScalarTraits<F>::to_double(radial.im / expect) == doctest::Approx(0.0).epsilon(1e-30));
}

TEST_CASE("reality and serialization")
{
    ESeries s(2, 4);
    s.add_term(Monomial({1, 0}, {0, 1}), ExactScalar(Rational(1, 3), Rational(2)));
    CHECK_THROWS_AS(s.mark_real(), RealityError);
    s.add_term(Monomial({0, 1}, {1, 0}), ExactScalar(Rational(1, 3), Rational(-2)));
    s.mark_real();
    const auto j = series_to_json(s);
    CHECK(j["terms"][0]["re"] == "1/3");
    CHECK(series_from_json<ExactScalar>(j) == s);
    CHECK(j.dump() == series_to_json(series_from_json<ExactScalar>(j)).dump());
    CHECK_THROWS_AS(series_from_json<FloatScalar>(j), BackendError);
}
