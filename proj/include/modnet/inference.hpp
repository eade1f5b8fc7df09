#pragma once

#include <modnet/asymptotics.hpp>
#include <modnet/types.hpp>

namespace modnet::inference {

enum class TestKind { ks_two_sample, ks_normal, t_pooled, t_welch };

struct TestResult {
    double statistic = 0.0;
    double pvalue = 1.0;
    TestKind kind = TestKind::ks_two_sample;
};

struct PowerSpec {
    Matrix B0;
    Matrix B1;
    Vector pi;
    double rho = 1.0;
    int n = 0;
    double alpha = 0.05;
};

double normal_cdf(double x);

// Inverse standard normal CDF, |normal_cdf(normal_quantile(p)) - p| < 1e-10.
double normal_quantile(double p);

// Student-t CDF through the regularized incomplete beta function.
double t_cdf(double t, double dof);

// Complementary Kolmogorov CDF, the limiting two-sided KS p-value.
double kolmogorov_pvalue(double lambda);

double t_statistic_L(double ql_scaled, const Matrix& B0, const Vector& pi,
                     asymptotics::Regime regime);

double t_statistic_S(double qs_scaled, const Matrix& B0, const Vector& pi, double rho,
                     asymptotics::Regime regime);

double analytic_power_L(const PowerSpec& spec, asymptotics::Regime regime);

double analytic_power_S(const PowerSpec& spec, asymptotics::Regime regime);

TestResult ks_two_sample(const Vector& x, const Vector& y);

// One-sample KS distance against N(mean, var); conservative when the moments
// were estimated from the same sample.
TestResult ks_normal(const Vector& x, double mean, double var);

TestResult t_test(const Vector& x, const Vector& y, bool equal_variance);

}  // namespace modnet::inference
