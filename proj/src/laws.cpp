#include "tess/laws.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tess/errors.hpp"
#include "tess/geom.hpp"
#include "tess/special.hpp"

namespace tess {

namespace {

constexpr double pi = std::numbers::pi;

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

double unit_ball_volume(int d) { return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

LawSet constants(int d) {
    if (d < 1 || d > 6) throw DomainError("dimension must be in 1..6");
    LawSet L;
    L.d = d;
    const double dd = d;
    L.kappa = unit_ball_volume(d);
    L.beta = (dd * dd * dd + dd * dd) * std::tgamma(dd * dd / 2.0) * std::pow(std::tgamma((dd + 1.0) / 2.0), dd) /
             (std::tgamma((dd * dd + 1.0) / 2.0) * std::pow(std::tgamma((dd + 2.0) / 2.0), dd) *
              std::pow(2.0, dd + 1.0) * std::pow(pi, (dd - 1.0) / 2.0));
    L.delta = L.kappa * L.beta;
    L.delta_prime = (dd + 1.0) * L.beta;
    L.alpha1 = std::pow(L.delta, dd) / factorial(d);
    L.alpha6 = std::pow(std::sqrt(pi) * std::tgamma(dd / 2.0 + 1.0) / std::tgamma((dd + 1.0) / 2.0), dd - 1.0) /
               factorial(d);
    if (d == 2) {
        L.alpha2 = 2.0 * pi / (3.0 * std::sqrt(3.0));
        const double g = std::tgamma(1.0 / 6.0);
        L.alpha3 = std::pow(2.0, -2.0 / 3.0) / std::sqrt(3.0) / 5.0 * std::pow(pi, 2.0 / 3.0) * g * g;
    }
    return L;
}

double delaunay_circumradius_cdf(double v, int d) {
    if (!(v > 0.0)) return 0.0;
    const LawSet L = constants(d);
    return gamma_p_int(d, L.delta * std::pow(v, d));
}

namespace {

constexpr double kAreaScale = pi / (3.0 * 1.7320508075688772);  // alpha_2 * beta_2

// (6/pi) x K^2(x) dx in the variable s = x^(1/3).
double area_density_s(double s, double rel_tol = 1e-12) {
    if (s <= 0.0) return 0.0;
    const double x = s * s * s;
    const double k = bessel_k_sixth(x, rel_tol);
    return (6.0 / pi) * 3.0 * s * s * s * s * s * k * k;
}

double area_density_x(double x) {
    if (x <= 0.0) return 0.0;
    const double k = bessel_k_sixth(x);
    return (6.0 / pi) * x * k * k;
}

class AreaTable {
public:
    AreaTable() {
        constexpr std::array<double, 8> gx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                              -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                              0.7966664774136267,  0.9602898564975363};
        constexpr std::array<double, 8> gw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};
        h_ = s_max_ / n_;
        std::vector<double> piece(n_);
        for (int i = 0; i < n_; ++i) {
            const double a = i * h_, m = a + 0.5 * h_;
            double acc = 0.0;
            for (int k = 0; k < 8; ++k) acc += gw[k] * area_density_s(m + 0.5 * h_ * gx[k], 1e-11);
            piece[i] = 0.5 * h_ * acc;
        }
        cdf_.assign(n_ + 1, 0.0);
        sur_.assign(n_ + 1, 0.0);
        dens_.assign(n_ + 1, 0.0);
        for (int i = 0; i < n_; ++i) cdf_[i + 1] = cdf_[i] + piece[i];
        for (int i = n_; i-- > 0;) sur_[i] = sur_[i + 1] + piece[i];
        for (int i = 0; i <= n_; ++i) dens_[i] = area_density_s(i * h_, 1e-11);
    }

    // Survival in the variable u = alpha_2 beta_2 v; nullopt beyond the table.
    std::optional<double> survival(double u) const {
        if (u <= 0.0) return 1.0;
        const double s = std::cbrt(u);
        if (s >= s_max_) return std::nullopt;
        const int i = std::min(n_ - 1, static_cast<int>(s / h_));
        const double x = (s - i * h_) / h_;
        const double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
        const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
        if (cdf_[i + 1] < 0.5) {
            const double F = h00 * cdf_[i] + h10 * h_ * dens_[i] + h01 * cdf_[i + 1] + h11 * h_ * dens_[i + 1];
            return 1.0 - F;
        }
        return h00 * sur_[i] - h10 * h_ * dens_[i] + h01 * sur_[i + 1] - h11 * h_ * dens_[i + 1];
    }

    std::optional<double> cdf(double u) const {
        if (u <= 0.0) return 0.0;
        const double s = std::cbrt(u);
        if (s >= s_max_) return std::nullopt;
        const int i = std::min(n_ - 1, static_cast<int>(s / h_));
        const double x = (s - i * h_) / h_;
        const double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
        const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
        if (cdf_[i + 1] < 0.5)
            return h00 * cdf_[i] + h10 * h_ * dens_[i] + h01 * cdf_[i + 1] + h11 * h_ * dens_[i + 1];
        return 1.0 - (h00 * sur_[i] - h10 * h_ * dens_[i] + h01 * sur_[i + 1] - h11 * h_ * dens_[i + 1]);
    }

private:
    static constexpr int n_ = 1024;
    double s_max_ = std::cbrt(40.0);
    double h_ = 0.0;
    std::vector<double> cdf_, sur_, dens_;
};

const AreaTable& area_table() {
    static const AreaTable table;
    return table;
}

}  // namespace

double delaunay_area_survival_2d(double v) {
    if (!(v > 0.0)) return 1.0;
    const double u = kAreaScale * v;
    if (u < 1.0) {
        // Tolerance relative to the leading-order head, alpha_3 v^(5/3).
        const double lead = 4.8345011569 * std::pow(v, 5.0 / 3.0);
        const double head =
            adaptive_simpson([](double s) { return area_density_s(s); }, 0.0, std::cbrt(u), std::min(1e-12, 1e-11 * lead));
        return 1.0 - head;
    }
    // Upper limit where the integrand is negligible relative to its value at u.
    const double floor = 1e-16 * area_density_x(u);
    double X = u + 1.0;
    while (area_density_x(X) >= floor) X += 1.0;
    const double est = 1.5 * std::exp(-2.0 * u) + 1e-300;
    return adaptive_simpson(area_density_x, u, X, std::min(1e-10, 1e-9 * est));
}

double delaunay_area_survival_2d_fast(double v) {
    if (auto s = area_table().survival(kAreaScale * v)) return std::clamp(*s, 0.0, 1.0);
    return delaunay_area_survival_2d(v);
}

double delaunay_area_cdf_2d_fast(double v) {
    if (auto c = area_table().cdf(kAreaScale * v)) return std::clamp(*c, 0.0, 1.0);
    return 1.0 - delaunay_area_survival_2d(v);
}

double voronoi_inradius_survival(double v, int d) {
    if (!(v > 0.0)) return 1.0;
    return std::exp(-std::pow(2.0, d) * unit_ball_volume(d) * std::pow(v, d));
}

double flower_cdf(double v, const std::map<int, double>& pmf, double* truncation) {
    double mass = 0.0, acc = 0.0;
    for (const auto& [k, p] : pmf) {
        if (p < 0.0) throw DomainError("negative probability in neighbour pmf");
        if (k < 1) throw DomainError("neighbour count must be positive");
        mass += p;
        acc += p * gamma_p_int(k, v);
    }
    if (truncation) *truncation = std::max(0.0, 1.0 - mass);
    return acc;
}

McValue alpha_d4_estimate(int d, std::size_t mc_samples, std::uint64_t seed) {
    if (d != 2) throw DomainError("alpha_{d,4} estimator is planar");
    if (mc_samples < 1000) throw PrecisionError("alpha_{d,4} needs at least 1000 samples");
    std::mt19937_64 rng(seed);
    auto in_disk = [&]() {
        while (true) {
            const Point2 p{2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0};
            if (norm2(p) < 1.0) return p;
        }
    };
    std::size_t hits = 0;
    const Point2 o{0.0, 0.0};
    for (std::size_t i = 0; i < mc_samples; ++i) {
        const Point2 a = in_disk(), b = in_disk(), c = in_disk();
        // The cell of the origin is a bounded triangle iff the origin is interior to conv(a, b, c).
        const int s1 = orient2d(a, b, o), s2 = orient2d(b, c, o), s3 = orient2d(c, a, o);
        if (s1 != 0 && s1 == s2 && s2 == s3) ++hits;
    }
    const double scale = pi * pi * pi / factorial(3);
    const double f = static_cast<double>(hits) / static_cast<double>(mc_samples);
    return {scale * f, scale * std::sqrt(f * (1.0 - f) / static_cast<double>(mc_samples)), mc_samples, seed};
}

McValue alpha_d5_from_pmf(int d, double p, double se, std::size_t cells, std::uint64_t seed) {
    const double f = factorial(d + 1);
    return {p / f, se / f, cells, seed};
}

double extremal_index_delaunay_max_R(int d) {
    if (d < 1 || d > 3) throw DomainError("extremal index available for d in 1..3");
    const LawSet L = constants(d);
    return L.alpha6 * L.beta * factorial(d - 1);
}

double gp_lens_area(double v) {
    if (4.0 * v < 1.0) return 0.0;
    return 8.0 * v * v * std::acos(1.0 / (4.0 * v)) - 0.5 * std::sqrt(16.0 * v * v - 1.0);
}

double gp_palm_isolated(double v, const GaussPoissonParams& p) {
    p.validate();
    if (!(v > 0.0)) return 1.0;
    const double e = std::exp(-p.gamma_a * (4.0 * p.p1 * pi * v * v + p.p2 * (8.0 * pi * v * v - gp_lens_area(v))));
    const double jump = (2.0 * v < 1.0) ? p.p1 + 2.0 * p.p2 : p.p1;
    return jump / (p.p1 + 2.0 * p.p2) * e;
}

double gp_exponent(double v, const GaussPoissonParams& p) {
    return 4.0 * p.gamma_a * pi * (p.p1 + p.p2) * v * v + 4.0 * p.gamma_a * p.p2 * v -
           std::log(p.p1 / (p.p1 + 2.0 * p.p2));
}

double gp_threshold(double level, const GaussPoissonParams& p) {
    if (!(p.p1 > 0.0)) throw DomainError("Gauss-Poisson threshold needs p1 > 0");
    const double A = 4.0 * p.gamma_a * pi * (p.p1 + p.p2);
    const double B = 2.0 * p.gamma_a * p.p2;
    const double C = level + std::log(p.p1 / (p.p1 + 2.0 * p.p2));
    const double disc = B * B + A * C;
    if (disc < 0.0) return 0.0;
    // (-B + sqrt(B^2 + A C)) / A, written to avoid cancellation.
    return C / (B + std::sqrt(disc));
}

namespace {

struct Named {
    Experiment e;
    std::string_view name;
};

constexpr std::array<Named, 8> kCatalog{{
    {Experiment::DelaunayMinCircumradius, "delaunay_min_circumradius"},
    {Experiment::DelaunayMaxArea, "delaunay_max_area"},
    {Experiment::DelaunayMinArea, "delaunay_min_area"},
    {Experiment::VoronoiMinFarthest, "voronoi_min_farthest"},
    {Experiment::VoronoiMinFlower, "voronoi_min_flower"},
    {Experiment::VoronoiMinInradius, "voronoi_min_inradius"},
    {Experiment::DelaunayMaxCircumradius, "delaunay_max_circumradius"},
    {Experiment::GpMaxInradius, "gp_max_inradius"},
}};

}  // namespace

std::string_view experiment_name(Experiment e) {
    for (const auto& n : kCatalog)
        if (n.e == e) return n.name;
    return "unknown";
}

Experiment parse_experiment(std::string_view name) {
    for (const auto& n : kCatalog)
        if (n.name == name) return n.e;
    throw ConfigError("unknown experiment: " + std::string(name));
}

double ThresholdFamily::limit_cdf(double t) const {
    const double p = limit_prob(t);
    return orientation == Orientation::Max ? p : 1.0 - p;
}

double ThresholdFamily::v_of_tau(double target) const {
    if (!(target > 0.0)) throw DomainError("tau must be positive");
    if (!typical_exceed) return v(tau_inverse(target));
    auto g = [&](double v) { return rho * typical_exceed(v) - target; };
    const double guess = std::max(v(tau_inverse(target)), 1e-300);
    double lo = 0.0, hi = guess;
    if (orientation == Orientation::Max) {
        // g decreasing in v.
        while (g(hi) > 0.0) hi *= 2.0;
        lo = hi;
        while (lo > 1e-300 && g(lo) < 0.0) lo *= 0.5;
        if (g(lo) < 0.0) lo = 0.0;
    } else {
        while (g(hi) < 0.0) hi *= 2.0;
        lo = hi;
        while (lo > 1e-300 && g(lo) > 0.0) lo *= 0.5;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double m = 0.5 * (lo + hi);
        const bool below = orientation == Orientation::Max ? g(m) > 0.0 : g(m) < 0.0;
        (below ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

ThresholdFamily threshold_family(Experiment e, const FamilyParams& p) {
    if (!(p.rho > 1.0)) throw DomainError("rho must exceed 1");
    const int d = p.d;
    const double rho = p.rho;
    if (e != Experiment::VoronoiMinInradius && e != Experiment::DelaunayMinCircumradius &&
        e != Experiment::DelaunayMaxCircumradius && d != 2)
        throw UnsupportedFamily("experiment is planar only");
    const LawSet L = constants(d);

    ThresholdFamily f;
    f.experiment = e;
    f.d = d;
    f.rho = rho;

    auto power_law = [&f](double power) {
        f.orientation = Orientation::Min;
        f.b = 0.0;
        f.tau_fn = [power](double t) { return t > 0.0 ? std::pow(t, power) : 0.0; };
        f.tau_inverse = [power](double tau) { return std::pow(tau, 1.0 / power); };
    };
    auto gumbel = [&f]() {
        f.orientation = Orientation::Max;
        f.tau_fn = [](double t) { return std::exp(-t); };
        f.tau_inverse = [](double tau) { return -std::log(tau); };
    };

    switch (e) {
        case Experiment::DelaunayMinCircumradius: {
            power_law(d);
            f.score_power = d;
            f.a = std::pow(L.alpha1 * rho, -1.0 / d);
            const double delta = L.delta;
            f.typical_exceed = [d, delta](double s) { return s > 0.0 ? gamma_p_int(d, delta * s) : 0.0; };
            break;
        }
        case Experiment::DelaunayMaxArea: {
            gumbel();
            f.a = 1.0 / L.alpha2;
            f.b = std::log(1.5 * rho) / L.alpha2;
            f.typical_exceed = [](double v) { return delaunay_area_survival_2d_fast(v); };
            break;
        }
        case Experiment::DelaunayMinArea: {
            power_law(5.0 / 3.0);
            f.a = std::pow(L.alpha3 * rho, -3.0 / 5.0);
            f.typical_exceed = [](double v) { return delaunay_area_cdf_2d_fast(v); };
            break;
        }
        case Experiment::VoronoiMinFarthest: {
            if (!p.alpha4) throw UnsupportedFamily("voronoi_min_farthest needs alpha_{2,4}");
            power_law(d + 1);
            f.score_power = d;
            f.a = std::pow(*p.alpha4 * rho, -1.0 / (d + 1));
            break;
        }
        case Experiment::VoronoiMinFlower: {
            if (!p.alpha5) throw UnsupportedFamily("voronoi_min_flower needs alpha_{2,5}");
            power_law(d + 1);
            f.a = std::pow(*p.alpha5 * rho, -1.0 / (d + 1));
            break;
        }
        case Experiment::VoronoiMinInradius: {
            power_law(1.0);
            f.score_power = d;
            f.theta = 0.5;
            const double rate = std::pow(2.0, d) * L.kappa;
            f.a = 1.0 / (rate * rho);
            f.typical_exceed = [rate](double s) { return s > 0.0 ? -std::expm1(-rate * s) : 0.0; };
            break;
        }
        case Experiment::DelaunayMaxCircumradius: {
            gumbel();
            f.score_power = d;
            f.theta = extremal_index_delaunay_max_R(d);
            f.a = 1.0 / L.delta;
            f.b = std::log(rho * std::pow(std::log(L.beta * rho), d - 1) / factorial(d - 1)) / L.delta;
            const double delta = L.delta;
            f.typical_exceed = [d, delta](double s) { return s > 0.0 ? gamma_q_int(d, delta * s) : 1.0; };
            break;
        }
        case Experiment::GpMaxInradius: {
            gumbel();
            f.affine = false;
            const GaussPoissonParams gp = p.gp;
            gp.validate();
            const double lr = std::log(rho);
            f.v_fn = [gp, lr](double t) { return gp_threshold(lr + t, gp); };
            f.t_fn = [gp, lr](double v) { return gp_exponent(v, gp) - lr; };
            f.typical_exceed = [gp](double v) { return gp_palm_isolated(v, gp); };
            f.a = std::numeric_limits<double>::quiet_NaN();
            f.b = std::numeric_limits<double>::quiet_NaN();
            break;
        }
    }
    return f;
}

}  // namespace tess
