#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <modnet/inference.hpp>
#include <modnet/rng.hpp>

#include <cmath>

using namespace modnet;
using asymptotics::Regime;

namespace {

// Rank-one alternative pair used throughout the power studies.
inference::PowerSpec power_spec(double eps, int n)
{
    inference::PowerSpec spec;
    Vector v(2), u(2);
    v << 0.75, 0.25;
    u << 0.75 + eps, 0.25;
    spec.B0 = v * v.transpose();
    spec.B1 = u * u.transpose();
    spec.pi.resize(2);
    spec.pi << 0.25, 0.75;
    spec.n = n;
    return spec;
}

}  // namespace

TEST_CASE("normal_cdf hits the textbook values")
{
    CHECK(inference::normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(inference::normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
    CHECK(inference::normal_cdf(-1.959963985) == doctest::Approx(0.025).epsilon(1e-8));
    CHECK(inference::normal_cdf(3.0) == doctest::Approx(0.99865010).epsilon(1e-7));
    CHECK(inference::normal_cdf(-8.0) < 1e-14);
}

TEST_CASE("normal_quantile inverts the CDF to high accuracy")
{
    for (double p : {1e-9, 1e-4, 0.025, 0.2, 0.5, 0.7, 0.975, 0.9999, 1 - 1e-9}) {
        const double x = inference::normal_quantile(p);
        CHECK(std::abs(inference::normal_cdf(x) - p) < 1e-10);
    }
    CHECK(inference::normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(inference::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
    CHECK_THROWS_AS(inference::normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(inference::normal_quantile(1.0), std::domain_error);
}

TEST_CASE("t_cdf matches known quantiles and the normal limit")
{
    // t_{0.975} quantiles: 12.706 (1 dof), 2.228 (10 dof), 2.042 (30 dof).
    CHECK(inference::t_cdf(12.7062047, 1) == doctest::Approx(0.975).epsilon(1e-7));
    CHECK(inference::t_cdf(2.22813885, 10) == doctest::Approx(0.975).epsilon(1e-7));
    CHECK(inference::t_cdf(2.04227246, 30) == doctest::Approx(0.975).epsilon(1e-7));
    CHECK(inference::t_cdf(0.0, 5) == doctest::Approx(0.5));
    CHECK(inference::t_cdf(-2.0, 7) == doctest::Approx(1.0 - inference::t_cdf(2.0, 7)));
    CHECK(inference::t_cdf(1.96, 100000) == doctest::Approx(inference::normal_cdf(1.96)).epsilon(1e-4));
}

TEST_CASE("kolmogorov_pvalue spans both evaluation branches")
{
    // Reference values of the Kolmogorov distribution complement.
    CHECK(inference::kolmogorov_pvalue(0.5) == doctest::Approx(0.9639452436).epsilon(1e-6));
    CHECK(inference::kolmogorov_pvalue(1.0) == doctest::Approx(0.2699996717).epsilon(1e-6));
    CHECK(inference::kolmogorov_pvalue(1.5) == doctest::Approx(0.0222179626).epsilon(1e-6));
    CHECK(inference::kolmogorov_pvalue(2.0) == doctest::Approx(0.00067092).epsilon(1e-4));
    CHECK(inference::kolmogorov_pvalue(0.02) == doctest::Approx(1.0));
    // Both series branches straddle 1.18; the function stays monotone there.
    CHECK(inference::kolmogorov_pvalue(1.1799) == doctest::Approx(0.123512049712).epsilon(1e-8));
    CHECK(inference::kolmogorov_pvalue(1.1801) == doctest::Approx(0.123395591619).epsilon(1e-8));
    CHECK(inference::kolmogorov_pvalue(1.1799) > inference::kolmogorov_pvalue(1.1801));
}

TEST_CASE("t statistics standardize by the limiting moments")
{
    const auto spec = power_spec(0.0, 100);
    // Var_L = 0.0966796875 for this null, so the statistic is q / sigma.
    const double tl = inference::t_statistic_L(0.31, spec.B0, spec.pi, Regime::dense);
    CHECK(tl == doctest::Approx(0.31 / std::sqrt(0.0966796875)));

    // The spectral statistic first removes the rho-scaled bias term.
    const double ts = inference::t_statistic_S(0.2, spec.B0, spec.pi, 1.0, Regime::dense);
    CHECK(ts == doctest::Approx((0.2 - (-0.09375)) / std::sqrt(0.0582275390625)));
    const double ts_sparse = inference::t_statistic_S(0.2, spec.B0, spec.pi, 0.25, Regime::sparse);
    CHECK(ts_sparse == doctest::Approx((0.2 - (-0.1875 / 0.5)) / std::sqrt(0.07470703125)));
}

TEST_CASE("analytic power reproduces the frozen rank-one study")
{
    CHECK(inference::analytic_power_L(power_spec(0.02, 100), Regime::dense) ==
          doctest::Approx(0.09298).epsilon(2e-4));
    CHECK(inference::analytic_power_L(power_spec(0.02, 500), Regime::dense) ==
          doctest::Approx(0.86405).epsilon(2e-4));
    CHECK(inference::analytic_power_L(power_spec(0.02, 1000), Regime::dense) ==
          doctest::Approx(0.99998).epsilon(2e-4));
    CHECK(inference::analytic_power_S(power_spec(0.02, 100), Regime::dense) ==
          doctest::Approx(0.12838).epsilon(2e-4));
    CHECK(inference::analytic_power_S(power_spec(0.02, 500), Regime::dense) ==
          doctest::Approx(0.97715).epsilon(2e-4));
    CHECK(inference::analytic_power_L(power_spec(0.05, 100), Regime::dense) ==
          doctest::Approx(0.34245).epsilon(2e-4));
    CHECK(inference::analytic_power_S(power_spec(0.05, 100), Regime::dense) ==
          doctest::Approx(0.54261).epsilon(2e-4));
}

TEST_CASE("analytic power at the null equals the level")
{
    const auto spec = power_spec(0.0, 500);
    CHECK(inference::analytic_power_L(spec, Regime::dense) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(inference::analytic_power_S(spec, Regime::dense) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("ks_two_sample separates shifted samples and accepts equal ones")
{
    Rng rng(60);
    const int m = 400;
    Vector x(m), y(m), z(m);
    for (int i = 0; i < m; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal() + 1.5;
        z[i] = rng.normal();
    }
    const auto sep = inference::ks_two_sample(x, y);
    CHECK(sep.kind == inference::TestKind::ks_two_sample);
    CHECK(sep.statistic > 0.4);
    CHECK(sep.pvalue < 1e-6);

    const auto same = inference::ks_two_sample(x, z);
    CHECK(same.statistic < 0.1);
    CHECK(same.pvalue > 0.05);

    Vector tiny(1);
    tiny << 0.0;
    CHECK_THROWS_AS(inference::ks_two_sample(tiny, x), std::domain_error);
}

TEST_CASE("ks_normal is calibrated under the null and sensitive under shift")
{
    Rng rng(61);
    const int trials = 200, m = 120;
    int rejections = 0;
    for (int t = 0; t < trials; ++t) {
        Vector x(m);
        for (int i = 0; i < m; ++i) x[i] = 2.0 + 3.0 * rng.normal();
        const auto res = inference::ks_normal(x, 2.0, 9.0);
        if (res.pvalue < 0.05) ++rejections;
    }
    // Nominal 5 percent level: 200 trials lands within a loose binomial band.
    CHECK(rejections >= 1);
    CHECK(rejections <= 25);

    Vector shifted(m);
    for (int i = 0; i < m; ++i) shifted[i] = 1.0 + rng.normal();
    const auto off = inference::ks_normal(shifted, 0.0, 1.0);
    CHECK(off.pvalue < 1e-4);

    Vector small(4);
    small << 1, 2, 3, 4;
    CHECK_THROWS_AS(inference::ks_normal(small, 0.0, 1.0), std::domain_error);
    Vector ok(10);
    ok.setLinSpaced(10, 0.0, 1.0);
    CHECK_THROWS_AS(inference::ks_normal(ok, 0.0, 0.0), std::domain_error);
}

TEST_CASE("t_test distinguishes means in both variance modes")
{
    Rng rng(62);
    const int m = 150;
    Vector x(m), y(m), w(m);
    for (int i = 0; i < m; ++i) {
        x[i] = rng.normal();
        y[i] = 0.8 + rng.normal();
        w[i] = 0.8 + 3.0 * rng.normal();
    }
    const auto pooled = inference::t_test(x, y, true);
    CHECK(pooled.kind == inference::TestKind::t_pooled);
    CHECK(pooled.pvalue < 1e-6);

    const auto welch = inference::t_test(x, w, false);
    CHECK(welch.kind == inference::TestKind::t_welch);
    CHECK(welch.pvalue < 0.05);

    const auto null_case = inference::t_test(x, x, true);
    CHECK(null_case.statistic == doctest::Approx(0.0));
    CHECK(null_case.pvalue == doctest::Approx(1.0));

    Vector const_a = Vector::Ones(10), const_b = Vector::Ones(10);
    CHECK_THROWS_AS(inference::t_test(const_a, const_b, false), std::domain_error);
}

TEST_CASE("t_test level is close to nominal under the null")
{
    Rng rng(63);
    const int trials = 400, m = 40;
    int rejections = 0;
    for (int t = 0; t < trials; ++t) {
        Vector x(m), y(m);
        for (int i = 0; i < m; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
        }
        if (inference::t_test(x, y, true).pvalue < 0.05) ++rejections;
    }
    CHECK(rejections >= 6);
    CHECK(rejections <= 40);
}
