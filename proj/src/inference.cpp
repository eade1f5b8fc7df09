#include <modnet/inference.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace modnet::inference {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

// Continued fraction for the regularized incomplete beta function.
double beta_cf(double a, double b, double x)
{
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw numerical_error("incomplete beta continued fraction did not converge");
}

double reg_inc_beta(double a, double b, double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
                                  + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double sample_mean(const Vector& x) { return x.mean(); }

double sample_var(const Vector& x)
{
    const double m = x.mean();
    return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

double ks_lambda(double d, double effective_n)
{
    const double rn = std::sqrt(effective_n);
    return (rn + 0.12 + 0.11 / rn) * d;
}

double power_from(double mu, double sigma, double alpha)
{
    const double z = normal_quantile(1.0 - alpha / 2.0);
    return 1.0 - normal_cdf(mu + sigma * z) + normal_cdf(mu - sigma * z);
}

double mean_shift(const PowerSpec& spec)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < spec.pi.size(); ++k)
        s += spec.pi(k) * spec.pi(k) * (spec.B0(k, k) - spec.B1(k, k));
    return static_cast<double>(spec.n) * std::sqrt(spec.rho) * s;
}

void check_power_spec(const PowerSpec& spec)
{
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw std::domain_error("alpha outside (0,1)");
    if (spec.n < 1) throw std::domain_error("network order must be positive");
    if (spec.B0.rows() != spec.B1.rows() || spec.B0.cols() != spec.B1.cols())
        throw std::invalid_argument("B0 and B1 must have the same order");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile probability outside (0,1)");
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // One Halley step against the high-accuracy CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double t_cdf(double t, double dof)
{
    if (!(dof > 0.0)) throw std::domain_error("degrees of freedom must be positive");
    const double x = dof / (dof + t * t);
    const double half_tail = 0.5 * reg_inc_beta(0.5 * dof, 0.5, x);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double kolmogorov_pvalue(double lambda)
{
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-theta form, rapidly convergent for small arguments.
        const double f = std::exp(-3.14159265358979324 * 3.14159265358979324 / (8.0 * lambda * lambda));
        const double cdf = kSqrt2Pi / lambda * (f + std::pow(f, 9.0) + std::pow(f, 25.0) + std::pow(f, 49.0));
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double t_statistic_L(double ql_scaled, const Matrix& B0, const Vector& pi,
                     asymptotics::Regime regime)
{
    const double var0 = asymptotics::moments(asymptotics::Stat::L, B0, pi, regime).variance;
    if (!(var0 > 0.0)) throw std::domain_error("null variance is not positive");
    return ql_scaled / std::sqrt(var0);
}

double t_statistic_S(double qs_scaled, const Matrix& B0, const Vector& pi, double rho,
                     asymptotics::Regime regime)
{
    const asymptotics::AsymptoticMoments m0 =
        asymptotics::moments(asymptotics::Stat::S, B0, pi, regime);
    if (!(m0.variance > 0.0)) throw std::domain_error("null variance is not positive");
    return (qs_scaled - m0.bias / std::sqrt(rho)) / std::sqrt(m0.variance);
}

double analytic_power_L(const PowerSpec& spec, asymptotics::Regime regime)
{
    check_power_spec(spec);
    const double var0 = asymptotics::moments(asymptotics::Stat::L, spec.B0, spec.pi, regime).variance;
    const double var1 = asymptotics::moments(asymptotics::Stat::L, spec.B1, spec.pi, regime).variance;
    if (!(var0 > 0.0 && var1 > 0.0)) throw std::domain_error("power needs positive variances");
    const double mu = mean_shift(spec) / std::sqrt(var1);
    return power_from(mu, std::sqrt(var0 / var1), spec.alpha);
}

double analytic_power_S(const PowerSpec& spec, asymptotics::Regime regime)
{
    check_power_spec(spec);
    const asymptotics::AsymptoticMoments m0 =
        asymptotics::moments(asymptotics::Stat::S, spec.B0, spec.pi, regime);
    const asymptotics::AsymptoticMoments m1 =
        asymptotics::moments(asymptotics::Stat::S, spec.B1, spec.pi, regime);
    if (!(m0.variance > 0.0 && m1.variance > 0.0))
        throw std::domain_error("power needs positive variances");
    const double shift = mean_shift(spec) + (m0.bias - m1.bias) / std::sqrt(spec.rho);
    const double mu = shift / std::sqrt(m1.variance);
    return power_from(mu, std::sqrt(m0.variance / m1.variance), spec.alpha);
}

TestResult ks_two_sample(const Vector& x, const Vector& y)
{
    const Eigen::Index nx = x.size(), ny = y.size();
    if (nx < 2 || ny < 2) throw std::domain_error("both samples need at least 2 points");
    std::vector<double> xs(x.data(), x.data() + nx), ys(y.data(), y.data() + ny);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double dmax = 0.0;
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
        const double v = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= v) ++i;
        while (j < ys.size() && ys[j] <= v) ++j;
        dmax = std::max(dmax, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const double ne = static_cast<double>(nx) * static_cast<double>(ny) / static_cast<double>(nx + ny);
    TestResult out;
    out.statistic = dmax;
    out.pvalue = kolmogorov_pvalue(ks_lambda(dmax, ne));
    out.kind = TestKind::ks_two_sample;
    return out;
}

TestResult ks_normal(const Vector& x, double mean, double var)
{
    const Eigen::Index n = x.size();
    if (n < 8) throw std::domain_error("sample needs at least 8 points");
    if (!(var > 0.0)) throw std::domain_error("variance must be positive");
    std::vector<double> xs(x.data(), x.data() + n);
    std::sort(xs.begin(), xs.end());
    const double sd = std::sqrt(var);
    double dmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double f = normal_cdf((xs[static_cast<std::size_t>(i)] - mean) / sd);
        dmax = std::max(dmax, std::max(f - static_cast<double>(i) / n,
                                       static_cast<double>(i + 1) / n - f));
    }
    TestResult out;
    out.statistic = dmax;
    out.pvalue = kolmogorov_pvalue(ks_lambda(dmax, static_cast<double>(n)));
    out.kind = TestKind::ks_normal;
    return out;
}

TestResult t_test(const Vector& x, const Vector& y, bool equal_variance)
{
    const Eigen::Index nx = x.size(), ny = y.size();
    if (nx < 2 || ny < 2) throw std::domain_error("both samples need at least 2 points");
    const double mx = sample_mean(x), my = sample_mean(y);
    const double vx = sample_var(x), vy = sample_var(y);
    if (vx <= 0.0 && vy <= 0.0) throw std::domain_error("both samples have zero variance");
    double t, dof;
    if (equal_variance) {
        const double pooled = ((nx - 1) * vx + (ny - 1) * vy) / static_cast<double>(nx + ny - 2);
        t = (mx - my) / std::sqrt(pooled * (1.0 / nx + 1.0 / ny));
        dof = static_cast<double>(nx + ny - 2);
    } else {
        const double ax = vx / nx, ay = vy / ny;
        t = (mx - my) / std::sqrt(ax + ay);
        dof = (ax + ay) * (ax + ay) / (ax * ax / (nx - 1) + ay * ay / (ny - 1));
    }
    TestResult out;
    out.statistic = t;
    out.pvalue = 2.0 * (1.0 - t_cdf(std::abs(t), dof));
    out.kind = equal_variance ? TestKind::t_pooled : TestKind::t_welch;
    return out;
}

}  // namespace modnet::inference
