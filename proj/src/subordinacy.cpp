#include "cmvdyn/subordinacy.hpp"

#include "cmvdyn/error.hpp"
#include "cmvdyn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cmvdyn {
namespace {

constexpr double rescale_threshold = 1e150;

void require_unimodular(Complex z, const char* what) {
    if (std::abs(std::abs(z) - 1.0) > 1e-12) {
        std::ostringstream os;
        os << what << " = " << z << " is not on the unit circle";
        fail(ErrorKind::domain, os.str());
    }
}

/// One step (u, v) -> T(z, alpha) (u, v) without forming the matrix.
struct Step {
    Complex z, alpha;
    double inv_rho;

    Step(Complex z_, Complex alpha_) : z(z_), alpha(alpha_) {
        const double a2 = std::norm(alpha);
        if (!(a2 < 1.0)) fail(ErrorKind::domain, "Verblunsky coefficient outside the open disk");
        inv_rho = 1.0 / std::sqrt(1.0 - a2);
    }

    void apply(Complex& u, Complex& v) const {
        const Complex zu = z * u;
        const Complex nu = (zu - std::conj(alpha) * v) * inv_rho;
        v = (v - alpha * zu) * inv_rho;
        u = nu;
    }
};

/// Partial sums of |phi_n|^2 and |psi_n|^2, extended on demand.
class PolynomialNorms {
public:
    PolynomialNorms(const VerblunskySequence& alphas, Complex z) : alphas_(alphas), z_(z) {
        phi_sq_.push_back(1.0);
        psi_sq_.push_back(1.0);
    }

    Index available() const noexcept { return static_cast<Index>(phi_sq_.size()); }

    void ensure(Index n) {
        while (available() <= n) {
            Step(z_, alphas_.alpha(available() - 1)).apply(phi_, phi_star_);
            Step(z_, alphas_.alpha(available() - 1)).apply(psi_, psi_star_);
            phi_sq_.push_back(phi_sq_.back() + std::norm(phi_));
            psi_sq_.push_back(psi_sq_.back() + std::norm(psi_));
        }
    }

    double phi_norm(double L) { return norm(phi_sq_, L); }
    double psi_norm(double L) { return norm(psi_sq_, L); }

private:
    double norm(const std::vector<double>& prefix, double L) {
        const double fl = std::floor(L);
        const auto m = static_cast<Index>(fl);
        const double frac = L - fl;
        if (frac == 0.0) {
            ensure(m);
            return std::sqrt(prefix[static_cast<std::size_t>(m)]);
        }
        ensure(m + 1);
        const double next = prefix[static_cast<std::size_t>(m + 1)] - prefix[static_cast<std::size_t>(m)];
        return std::sqrt(prefix[static_cast<std::size_t>(m)] + frac * next);
    }

    const VerblunskySequence& alphas_;
    Complex z_;
    Complex phi_{1.0}, phi_star_{1.0}, psi_{1.0}, psi_star_{-1.0};
    std::vector<double> phi_sq_, psi_sq_;
};

double find_length(PolynomialNorms& norms, double r, Index budget) {
    if (!(r >= 0.0 && r < 1.0)) fail(ErrorKind::domain, "r must lie in [0, 1)");
    const double target = std::sqrt(2.0);
    auto product = [&](double L) { return (1.0 - r) * norms.phi_norm(L) * norms.psi_norm(L); };
    double lo = 0.0, hi = 1.0;
    while (product(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > static_cast<double>(budget)) {
            throw ResourceError("length budget exhausted before (1-r)||phi|| ||psi|| reached sqrt 2", budget);
        }
    }
    if (!(product(lo) <= target && product(hi) >= target)) fail(ErrorKind::numerical, "invalid bisection bracket");
    while (hi - lo > 1e-9 * hi) {
        const double mid = 0.5 * (lo + hi);
        (product(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
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

}  // namespace

TransferMatrix transfer_matrix(Complex z, Complex alpha) {
    const Step s(z, alpha);
    TransferMatrix t;
    t << z, -std::conj(alpha), -alpha * z, 1.0;
    return t * s.inv_rho;
}

TransferMatrix transfer_product(const VerblunskySequence& alphas, Complex z, Index n) {
    TransferMatrix t = TransferMatrix::Identity();
    for (Index k = 0; k < n; ++k) t = transfer_matrix(z, alphas.alpha(k)) * t;
    return t;
}

OpucSequences opuc_polynomials(const VerblunskySequence& alphas, Complex z, Index n_max) {
    if (n_max < 0) fail(ErrorKind::domain, "n_max must be nonnegative");
    OpucSequences out;
    const auto size = static_cast<std::size_t>(n_max + 1);
    out.phi.reserve(size);
    out.phi_star.reserve(size);
    out.psi.reserve(size);
    out.psi_star.reserve(size);
    out.log_scale.reserve(size);
    Complex p{1.0}, ps{1.0}, q{1.0}, qs{-1.0};
    double offset = 0.0;
    for (Index n = 0;; ++n) {
        out.phi.push_back(p);
        out.phi_star.push_back(ps);
        out.psi.push_back(q);
        out.psi_star.push_back(qs);
        out.log_scale.push_back(offset);
        if (n == n_max) break;
        const Step step(z, alphas.alpha(n));
        step.apply(p, ps);
        step.apply(q, qs);
        const double big = std::max({std::abs(p), std::abs(ps), std::abs(q), std::abs(qs)});
        if (big > rescale_threshold) {
            p /= big;
            ps /= big;
            q /= big;
            qs /= big;
            offset += std::log(big);
        }
    }
    return out;
}

double local_norm(const std::vector<Complex>& a, double L) {
    if (!(L >= 0.0)) fail(ErrorKind::domain, "L must be nonnegative");
    const double fl = std::floor(L);
    const auto m = static_cast<std::size_t>(fl);
    const double frac = L - fl;
    if (a.size() < m + (frac > 0.0 ? 2 : 1)) fail(ErrorKind::input, "sequence too short for the requested L");
    double s = 0.0;
    for (std::size_t n = 0; n <= m; ++n) s += std::norm(a[n]);
    if (frac > 0.0) s += frac * std::norm(a[m + 1]);
    return std::sqrt(s);
}

double jl_length(const VerblunskySequence& alphas, Complex z, double r, Index budget) {
    require_unimodular(z, "z");
    PolynomialNorms norms(alphas, z);
    return find_length(norms, r, budget);
}

JlRatioTable jl_ratio_check(const VerblunskySequence& alphas, const DiscreteMeasure& mu, Complex z,
                            const std::vector<double>& r_grid) {
    require_unimodular(z, "z");
    JlRatioTable table;
    PolynomialNorms norms(alphas, z);
    double lo = 1.0, hi = 1.0;
    for (double r : r_grid) {
        JlRow row;
        row.r = r;
        row.L = find_length(norms, r, default_length_budget);
        row.F_abs = std::abs(caratheodory_F(mu, r * z));
        row.norm_ratio = norms.psi_norm(row.L) / norms.phi_norm(row.L);
        row.ratio = row.F_abs / row.norm_ratio;
        row.below_resolution = 1.0 - r < 10.0 * mu.resolution();
        if (row.below_resolution) {
            std::ostringstream os;
            os << "r = " << r << " is within 10x the atomic resolution " << mu.resolution();
            table.warnings.push_back(os.str());
        }
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
        table.rows.push_back(row);
    }
    table.band = std::max(hi, 1.0 / lo);
    return table;
}

SolutionNorms whole_line_solution(const VerblunskySequence& alphas, Complex z, Complex xi0, Complex zeta0,
                                  const std::vector<double>& L_samples) {
    require_unimodular(z, "z");
    require_unimodular(xi0, "xi0");
    require_unimodular(zeta0, "zeta0");
    for (std::size_t i = 0; i < L_samples.size(); ++i) {
        if (!(L_samples[i] >= 0.0)) fail(ErrorKind::domain, "L samples must be nonnegative");
        if (i > 0 && !(L_samples[i] > L_samples[i - 1])) fail(ErrorKind::input, "L samples must increase");
    }
    SolutionNorms out;
    out.L = L_samples;
    out.log_norms.reserve(L_samples.size());
    if (L_samples.empty()) return out;

    // Sample L needs S_{floor L} plus frac |xi_{floor L + 1}|^2; both are in the current scale
    // when xi_{floor L + 1} is in hand, because rescaling happens only after the samples are taken.
    const auto last = static_cast<Index>(std::floor(L_samples.back())) + 1;
    Complex x = xi0, y = zeta0;
    double partial = 0.0;  // S_{n-1} in current units
    double offset = 0.0;   // log of the amplitude unit
    std::size_t next = 0;
    for (Index n = 0; n <= last && next < L_samples.size(); ++n) {
        const double xn2 = std::norm(x);
        while (next < L_samples.size() && static_cast<Index>(std::floor(L_samples[next])) == n - 1) {
            const double frac = L_samples[next] - std::floor(L_samples[next]);
            out.log_norms.push_back(0.5 * std::log(partial + frac * xn2) + offset);
            ++next;
        }
        partial += xn2;
        if (n == last) break;
        Step(z, alphas.alpha(n)).apply(x, y);
        const double big = std::max(std::abs(x), std::abs(y));
        if (big > rescale_threshold) {
            x /= big;
            y /= big;
            partial /= big * big;
            offset += std::log(big);
        }
    }
    return out;
}

std::vector<std::pair<Complex, Complex>> boundary_conditions(int count) {
    if (count < 1) fail(ErrorKind::domain, "need at least one boundary condition");
    std::vector<std::pair<Complex, Complex>> out;
    for (int k = 0; k < count; ++k) out.emplace_back(1.0, std::polar(1.0, 2.0 * std::numbers::pi * k / count));
    return out;
}

std::vector<double> dyadic_lengths(int first, int last) {
    std::vector<double> out;
    for (int e = first; e <= last; ++e) out.push_back(std::ldexp(1.0, e));
    return out;
}

PowerLawFit power_law_fit(const std::vector<SolutionNorms>& per_condition) {
    if (per_condition.size() < 8) fail(ErrorKind::input, "power-law fit needs at least 8 boundary conditions");
    PowerLawFit fit;
    for (const auto& s : per_condition) {
        if (s.L.size() < 8 || s.log_norms.size() != s.L.size()) {
            fail(ErrorKind::input, "power-law fit needs at least 8 samples per boundary condition");
        }
        std::vector<double> x, y;
        for (std::size_t i = 0; i < s.L.size(); ++i) {
            if (!(s.L[i] > 0.0)) fail(ErrorKind::input, "power-law fit needs L > 0");
            if (i > 0 && s.log_norms[i] < s.log_norms[i - 1] - 1e-12 * std::abs(s.log_norms[i - 1])) {
                fail(ErrorKind::numerical, "local norms decrease in L");
            }
            x.push_back(std::log(s.L[i]));
            y.push_back(s.log_norms[i]);
        }
        fit.slopes.push_back(least_squares_slope(x, y));
    }
    const auto [lo, hi] = std::minmax_element(fit.slopes.begin(), fit.slopes.end());
    fit.gamma1 = *lo;
    fit.gamma2 = *hi;
    if (!(fit.gamma1 + fit.gamma2 > 0.0)) fail(ErrorKind::numerical, "no growth: alpha undefined");
    fit.alpha = 2.0 * fit.gamma1 / (fit.gamma1 + fit.gamma2);
    return fit;
}

PowerLawFit solution_exponents(const VerblunskySequence& alphas, Complex z, const std::vector<double>& L_samples,
                               int count) {
    std::vector<SolutionNorms> norms;
    for (const auto& [xi0, zeta0] : boundary_conditions(count))
        norms.push_back(whole_line_solution(alphas, z, xi0, zeta0, L_samples));
    return power_law_fit(norms);
}

}  // namespace cmvdyn
