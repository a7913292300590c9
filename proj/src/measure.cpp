#include "cmvdyn/measure.hpp"

#include "cmvdyn/dynamics.hpp"
#include "cmvdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cmvdyn {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_horizon(Index K) {
    if (K < 1) fail(ErrorKind::domain, "K must be at least 1");
}

void require_unimodular(Complex z, const char* what) {
    if (std::abs(std::abs(z) - 1.0) > 1e-12) {
        std::ostringstream os;
        os << what << " = " << z << " is not on the unit circle";
        fail(ErrorKind::domain, os.str());
    }
}

double wrapped(double t) {
    t = std::fmod(t, two_pi);
    return t < 0.0 ? t + two_pi : t;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Atom angles sorted in [0, 2pi) with prefix sums of the weights, for arc-mass queries.
class SortedAtoms {
public:
    explicit SortedAtoms(const DiscreteMeasure& mu) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(mu.size());
        for (const auto& a : mu.atoms()) pts.emplace_back(angle_of(a.z), a.w);
        std::sort(pts.begin(), pts.end());
        angles_.reserve(pts.size());
        prefix_.assign(1, 0.0);
        for (const auto& [t, w] : pts) {
            angles_.push_back(t);
            prefix_.push_back(prefix_.back() + w);
        }
    }

    const std::vector<double>& angles() const noexcept { return angles_; }
    double total() const noexcept { return prefix_.back(); }

    /// Mass in the closed angular interval [a, b] with 0 <= a <= b <= 2pi (small slack for rounding).
    double between(double a, double b) const {
        constexpr double slack = 1e-12;
        const auto lo = std::lower_bound(angles_.begin(), angles_.end(), a - slack) - angles_.begin();
        const auto hi = std::upper_bound(angles_.begin(), angles_.end(), b + slack) - angles_.begin();
        return hi > lo ? prefix_[static_cast<std::size_t>(hi)] - prefix_[static_cast<std::size_t>(lo)] : 0.0;
    }

    double arc(double center, double length) const {
        if (length >= two_pi) return total();
        const double a = wrapped(center - 0.5 * length);
        const double b = a + length;
        if (b <= two_pi) return between(a, b);
        return between(a, two_pi) + between(0.0, b - two_pi);
    }

private:
    std::vector<double> angles_;
    std::vector<double> prefix_;
};

}  // namespace

double fejer_integral(const DiscreteMeasure& mu, Complex z, Index K) {
    require_horizon(K);
    require_unimodular(z, "z");
    const double kk = static_cast<double>(K);
    double s = 0.0;
    for (const auto& a : mu.atoms()) {
        // |w^K - 1| / |w - 1| = |sin(K t/2) / sin(t/2)| for w = e^{it}.
        const double t = std::arg(std::conj(z) * a.z);
        const double den = std::sin(0.5 * t);
        const double q = den == 0.0 ? kk : std::min(kk, std::abs(std::sin(0.5 * kk * t) / den));
        s += a.w * q;
    }
    return s;
}

double strichartz_average(const DiscreteMeasure& mu, const std::vector<Complex>& f, Index K) {
    require_horizon(K);
    if (f.size() != mu.size()) fail(ErrorKind::alignment, "need one weight per atom");
    std::vector<double> theta(mu.size());
    std::vector<Complex> c(mu.size());
    for (std::size_t m = 0; m < mu.size(); ++m) {
        theta[m] = angle_of(mu.atoms()[m].z);
        c[m] = mu.atoms()[m].w * f[m];
    }
    double s = 0.0;
    for (Index j = 0; j < K; ++j) {
        Complex hat{0.0, 0.0};
        const double jj = static_cast<double>(j);
        for (std::size_t m = 0; m < c.size(); ++m) hat += c[m] * std::polar(1.0, -jj * theta[m]);
        s += std::norm(hat);
    }
    return s / static_cast<double>(K);
}

double arc_mass(const DiscreteMeasure& mu, double center, double length) {
    if (!(length > 0.0)) fail(ErrorKind::domain, "arc length must be positive");
    return SortedAtoms(mu).arc(center, length);
}

double uah_constant(const DiscreteMeasure& mu, double alpha, const std::vector<double>& arc_lengths) {
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "alpha must lie in (0, 1]");
    for (double l : arc_lengths)
        if (!(l > 0.0 && l <= two_pi)) fail(ErrorKind::domain, "arc lengths must lie in (0, 2pi]");
    const SortedAtoms sorted(mu);
    const auto& t = sorted.angles();
    std::vector<double> centers;
    centers.reserve(2 * t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        centers.push_back(t[i]);
        const double next = i + 1 < t.size() ? t[i + 1] : t.front() + two_pi;
        centers.push_back(wrapped(0.5 * (t[i] + next)));
    }
    double best = 0.0;
    for (double l : arc_lengths) {
        const double scale = std::pow(l, alpha);
        for (double c : centers) best = std::max(best, sorted.arc(c, l) / scale);
    }
    return best;
}

Complex caratheodory_F(const DiscreteMeasure& mu, Complex z) {
    if (!(std::abs(z) < 1.0)) fail(ErrorKind::domain, "Caratheodory function needs |z| < 1");
    Complex s{0.0, 0.0};
    for (const auto& a : mu.atoms()) s += a.w * (a.z + z) / (a.z - z);
    return s;
}

AlphaDerivativeProbe alpha_derivative_probe(const DiscreteMeasure& mu, Complex z0, double alpha,
                                            const std::vector<double>& r_grid) {
    require_unimodular(z0, "z0");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::domain, "alpha must lie in (0, 1)");
    if (r_grid.size() < 2) fail(ErrorKind::input, "probe needs at least two radii");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0 && r_grid[i] < 1.0)) fail(ErrorKind::domain, "radii must lie in (0, 1)");
        if (i > 0 && !(r_grid[i] > r_grid[i - 1])) fail(ErrorKind::input, "radii must increase");
    }
    AlphaDerivativeProbe out;
    const double floor_gap = 10.0 * mu.resolution();
    std::vector<double> x, y;
    for (double r : r_grid) {
        ProbeRow row{r, std::pow(1.0 - r, 1.0 - alpha) * std::abs(caratheodory_F(mu, r * z0)),
                     1.0 - r < floor_gap};
        if (row.below_resolution) {
            std::ostringstream os;
            os << "r = " << r << " is within 10x the atomic resolution " << mu.resolution();
            out.warnings.push_back(os.str());
        }
        out.rows.push_back(row);
        x.push_back(std::log(1.0 - r));
        y.push_back(std::log(row.value));
    }
    out.slope = least_squares_slope(x, y);
    return out;
}

ArcPartition::ArcPartition(int level) : level_(level) {
    if (level < 1 || level > 40) fail(ErrorKind::domain, "dyadic level must lie in [1, 40]");
}

double ArcPartition::start(Index j) const noexcept {
    return static_cast<double>(j) * std::numbers::pi / std::ldexp(1.0, level_ - 1);
}

Index ArcPartition::arc_of(Complex z) const noexcept {
    const double x = angle_of(z) / two_pi * static_cast<double>(size());
    const double nearest = std::round(x);
    const double snapped = std::abs(x - nearest) < 1e-9 ? nearest : std::floor(x);
    const auto j = static_cast<Index>(snapped);
    return j >= size() ? j - size() : j;
}

std::vector<double> ArcPartition::masses(const DiscreteMeasure& mu) const {
    std::vector<double> m(static_cast<std::size_t>(size()), 0.0);
    for (const auto& a : mu.atoms()) m[static_cast<std::size_t>(arc_of(a.z))] += a.w;
    return m;
}

DyadicQuantities dyadic_quantities(const DiscreteMeasure& mu, int N, double alpha) {
    if (N > 30) fail(ErrorKind::resource, "dyadic level above 30 would need more than 2^30 arcs");
    const ArcPartition part(N);
    DyadicQuantities q;
    q.arc_masses = part.masses(mu);
    const double threshold = std::exp2(-static_cast<double>(N) * alpha);
    for (Index j = 0; j < part.size(); ++j) {
        const double m = q.arc_masses[static_cast<std::size_t>(j)];
        if (m < threshold) {
            q.low_mass_arcs.push_back(j);
            q.b += m;
        }
    }
    return q;
}

double packing_radius_constant(double alpha, int d, double eta, double c_d) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::domain, "alpha must lie in (0, 1)");
    if (d < 1) fail(ErrorKind::domain, "dimension must be positive");
    if (!(eta > 0.0 && eta < (std::sqrt(6.0) - 2.0) / 4.0)) fail(ErrorKind::domain, "eta must lie in (0, (sqrt 6 - 2)/4)");
    if (!(c_d > 0.0)) fail(ErrorKind::domain, "C_d must be positive");
    const double inner = eta * eta * eta * std::pow(18.0 * std::numbers::pi, alpha) / (4.0 * std::numbers::pi * c_d);
    return std::pow(inner, 1.0 / d);
}

int gsb1_level(Index K, double epsilon) {
    require_horizon(K);
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail(ErrorKind::domain, "epsilon must lie in (0, 1)");
    const double x = static_cast<double>(K) * std::numbers::pi / std::sqrt(epsilon);
    int e = 0;
    std::frexp(x, &e);  // x = m 2^e with m in [0.5, 1), so 2^{e-1} <= x < 2^e
    return e + 1;
}

Gsb1Result gsb1_check(const BandedUnitary& u, const DiscreteMeasure& mu, const State& psi,
                      const std::vector<Index>& sites, Index K, double epsilon) {
    const SpectralData& spec = mu.spectral_data();
    Gsb1Result res;
    res.level = gsb1_level(K, epsilon);
    const Window rows{spec.offset, spec.offset + static_cast<Index>(spec.vectors.rows())};
    if (!rows.contains(psi.support())) fail(ErrorKind::alignment, "state reaches outside the eigenvector rows");
    for (Index n : sites)
        if (!rows.contains(n)) fail(ErrorKind::alignment, "site " + std::to_string(n) + " outside the eigenvector rows");

    stream_evolution(u, psi, K, [&](Index, const State& s) {
        for (Index n : sites) res.lhs += std::norm(s.at(n));
    });
    res.lhs /= static_cast<double>(K);

    // Spectral coefficients t_a = <v_a, psi>, grouped by dyadic arc.
    const ArcPartition part(res.level);
    const auto count = static_cast<Eigen::Index>(mu.size());
    std::vector<std::pair<Index, Eigen::Index>> order;
    order.reserve(mu.size());
    for (Eigen::Index a = 0; a < count; ++a) order.emplace_back(part.arc_of(mu.atoms()[static_cast<std::size_t>(a)].z), a);
    std::sort(order.begin(), order.end());
    std::vector<Complex> coeff(mu.size(), 0.0);
    for (Eigen::Index a = 0; a < count; ++a) {
        Complex t{0.0, 0.0};
        for (Index m = psi.first(); m < psi.end(); ++m) t += std::conj(spec.vectors(m - spec.offset, a)) * psi.at(m);
        coeff[static_cast<std::size_t>(a)] = t;
    }
    double projected = 0.0;
    for (Index n : sites) {
        const Eigen::Index row = n - spec.offset;
        for (std::size_t i = 0; i < order.size();) {
            Complex c{0.0, 0.0};
            std::size_t k = i;
            for (; k < order.size() && order[k].first == order[i].first; ++k) {
                const Eigen::Index a = order[k].second;
                c += spec.vectors(row, a) * coeff[static_cast<std::size_t>(a)];
            }
            projected += std::norm(c);
            i = k;
        }
    }
    res.rhs = 2.0 * epsilon + 8.0 * std::numbers::pi / std::sqrt(epsilon) * projected;
    return res;
}

}  // namespace cmvdyn
