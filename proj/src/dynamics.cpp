#include "cmvdyn/dynamics.hpp"

#include "cmvdyn/error.hpp"
#include "cmvdyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cmvdyn {

namespace {

constexpr double unit_norm_tolerance = 1e-12;

void require_unit(const State& psi) {
    if (psi.empty()) fail(ErrorKind::input, "initial state is zero");
    const double n = psi.norm();
    if (std::abs(n - 1.0) > unit_norm_tolerance) {
        std::ostringstream os;
        os << "initial state has norm " << n << ", expected 1";
        fail(ErrorKind::input, os.str());
    }
}

/// Operator whose interior covers every site reachable from `support` in K steps.
BandedUnitary reach_operator(const BandedUnitary& u, const Window& support, Index K) {
    const Index margin = 2 * std::max<Index>(K, 1) + 2;
    const Window need = intersect({support.lo - margin, support.hi + margin}, u.domain());
    if (u.window().contains(need) || !u.extensible()) return u;
    return u.with_window(need);
}

void evolve_into(const BandedUnitary& u, const State& psi0, Index K,
                 const std::function<void(Index, const State&)>& visit) {
    if (K < 1) fail(ErrorKind::input, "horizon K must be positive");
    const BandedUnitary op = reach_operator(u, psi0.support(), K);
    State psi = psi0;
    psi.trim();
    for (Index k = 0; k < K; ++k) {
        visit(k, psi);
        if (k + 1 < K) psi = apply(op, psi);
    }
}

double abs_power(double x, double p) {
    if (p == 1.0) return x;
    if (p == 2.0) return x * x;
    return std::pow(x, p);
}

void add_into(Profile& acc, const State& psi) {
    if (psi.empty()) return;
    if (acc.values.empty()) {
        acc.offset = psi.first();
        acc.values.assign(psi.amplitudes.size(), 0.0);
    }
    const Index lo = std::min(acc.offset, psi.first());
    const Index hi = std::max(acc.offset + static_cast<Index>(acc.values.size()), psi.end());
    if (lo < acc.offset) {
        acc.values.insert(acc.values.begin(), static_cast<std::size_t>(acc.offset - lo), 0.0);
        acc.offset = lo;
    }
    acc.values.resize(static_cast<std::size_t>(hi - lo), 0.0);
    for (Index n = psi.first(); n < psi.end(); ++n) acc.values[static_cast<std::size_t>(n - lo)] += std::norm(psi.at(n));
}

struct StepAccumulator {
    TransportSeries& series;

    void operator()(Index, const State& psi) {
        const std::size_t nr = series.radii.size(), np = series.powers.size();
        std::vector<double> in(nr, 0.0), out(nr, 0.0), mom(np, 0.0);
        double total = 0.0;
        for (Index n = psi.first(); n < psi.end(); ++n) {
            const double a = std::norm(psi.at(n));
            if (a == 0.0) continue;
            const double dist = std::abs(static_cast<double>(n));
            total += a;
            for (std::size_t r = 0; r < nr; ++r) (dist <= series.radii[r] ? in[r] : out[r]) += a;
            for (std::size_t p = 0; p < np; ++p) mom[p] += (abs_power(dist, series.powers[p]) + 1.0) * a;
        }
        series.total.push_back(total);
        series.p_in.push_back(std::move(in));
        series.p_out.push_back(std::move(out));
        series.moments.push_back(std::move(mom));
        add_into(series.cesaro, psi);
    }
};

TransportSeries empty_series(const std::vector<double>& radii, const std::vector<double>& powers) {
    if (radii.empty() || powers.empty()) fail(ErrorKind::input, "radii and powers must be nonempty");
    for (double p : powers)
        if (!(p > 0.0)) fail(ErrorKind::input, "moment powers must be positive");
    TransportSeries s;
    s.radii = radii;
    s.powers = powers;
    return s;
}

void finish_cesaro(TransportSeries& s) {
    const double inv = 1.0 / static_cast<double>(s.horizon());
    for (double& v : s.cesaro.values) v *= inv;
}

double running_mean(const std::vector<std::vector<double>>& rows, std::size_t col, Index K) {
    if (K < 1 || K > static_cast<Index>(rows.size())) fail(ErrorKind::input, "averaging horizon out of range");
    double s = 0.0;
    for (Index k = 0; k < K; ++k) s += rows[static_cast<std::size_t>(k)].at(col);
    return s / static_cast<double>(K);
}

BoundTable summarise(std::vector<BoundRow> rows) {
    BoundTable t;
    t.rows = std::move(rows);
    if (t.rows.empty()) return t;
    std::vector<double> ratios;
    for (const auto& r : t.rows) ratios.push_back(r.ratio);
    std::sort(ratios.begin(), ratios.end());
    const std::size_t m = ratios.size();
    t.median_ratio = m % 2 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
    t.max_ratio = ratios.back();
    t.consistent = t.max_ratio <= 10.0 * t.median_ratio;
    return t;
}

std::size_t radius_index(const TransportSeries& s, double N) {
    for (std::size_t r = 0; r < s.radii.size(); ++r)
        if (s.radii[r] == N) return r;
    fail(ErrorKind::input, "radius " + std::to_string(N) + " was not recorded in the transport series");
}


/// LU factorisation with partial pivoting of a matrix with `kl` sub- and `ku` superdiagonals,
/// stored column-major by diagonals: A(r, c) lives at ab[(kv + r - c) + c * ldab], kv = kl + ku,
/// leaving kl extra superdiagonals of room for pivoting fill-in.
class BandedLu {
public:
    BandedLu(std::vector<Complex> ab, Index n, int kl, int ku)
        : ab_(std::move(ab)), n_(n), kl_(kl), kv_(kl + ku), ldab_(2 * kl + ku + 1), pivot_(static_cast<std::size_t>(n)) {
        Index ju = 0;
        for (Index j = 0; j < n_; ++j) {
            const Index km = std::min<Index>(kl_, n_ - 1 - j);
            Index jp = 0;
            double best = std::abs(at(j, j));
            for (Index i = 1; i <= km; ++i) {
                const double v = std::abs(at(j + i, j));
                if (v > best) {
                    best = v;
                    jp = i;
                }
            }
            pivot_[static_cast<std::size_t>(j)] = j + jp;
            if (best == 0.0) fail(ErrorKind::numerical, "singular banded system at column " + std::to_string(j));
            ju = std::max(ju, std::min(j + ku + jp, n_ - 1));
            if (jp != 0)
                for (Index c = j; c <= ju; ++c) std::swap(at(j, c), at(j + jp, c));
            const Complex inv = 1.0 / at(j, j);
            for (Index i = 1; i <= km; ++i) at(j + i, j) *= inv;
            for (Index c = j + 1; c <= ju; ++c) {
                const Complex top = at(j, c);
                if (top == Complex{0.0, 0.0}) continue;
                for (Index i = 1; i <= km; ++i) at(j + i, c) -= at(j + i, j) * top;
            }
        }
    }

    void solve(std::vector<Complex>& b) const {
        for (Index j = 0; j < n_; ++j) {
            const Index p = pivot_[static_cast<std::size_t>(j)];
            if (p != j) std::swap(b[static_cast<std::size_t>(j)], b[static_cast<std::size_t>(p)]);
            const Complex x = b[static_cast<std::size_t>(j)];
            const Index km = std::min<Index>(kl_, n_ - 1 - j);
            for (Index i = 1; i <= km; ++i) b[static_cast<std::size_t>(j + i)] -= at(j + i, j) * x;
        }
        for (Index j = n_ - 1; j >= 0; --j) {
            Complex& x = b[static_cast<std::size_t>(j)];
            x /= at(j, j);
            for (Index i = std::max<Index>(0, j - kv_); i < j; ++i) b[static_cast<std::size_t>(i)] -= at(i, j) * x;
        }
    }

private:
    Complex& at(Index r, Index c) { return ab_[static_cast<std::size_t>(kv_ + r - c + c * ldab_)]; }
    const Complex& at(Index r, Index c) const { return ab_[static_cast<std::size_t>(kv_ + r - c + c * ldab_)]; }

    std::vector<Complex> ab_;
    Index n_;
    Index kl_, kv_, ldab_;
    std::vector<Index> pivot_;
};

}  // namespace

std::size_t evolution_bytes(Index initial_width, Index K) noexcept {
    const auto w = static_cast<std::size_t>(std::max<Index>(initial_width, 1));
    const auto k = static_cast<std::size_t>(std::max<Index>(K, 0));
    const std::size_t sites = k * w + 2 * k * (k > 0 ? k - 1 : 0);
    return sites * sizeof(Complex) + k * (sizeof(State) + sizeof(double));
}

EvolutionRecord evolve(const BandedUnitary& u, const State& psi0, Index K, std::size_t memory_budget) {
    require_unit(psi0);
    if (K < 1) fail(ErrorKind::input, "horizon K must be positive");
    const Index width = psi0.support().size();
    if (evolution_bytes(width, K) > memory_budget) {
        Index lo = 0, hi = K;  // largest admissible horizon by bisection
        while (lo < hi) {
            const Index mid = lo + (hi - lo + 1) / 2;
            if (evolution_bytes(width, mid) <= memory_budget) lo = mid;
            else hi = mid - 1;
        }
        std::ostringstream os;
        os << "evolution record for K = " << K << " needs " << evolution_bytes(width, K) << " bytes (budget "
           << memory_budget << "); largest admissible K is " << lo;
        throw ResourceError(os.str(), lo);
    }
    EvolutionRecord rec;
    rec.states.reserve(static_cast<std::size_t>(K));
    rec.norms.reserve(static_cast<std::size_t>(K));
    evolve_into(u, psi0, K, [&](Index, const State& psi) {
        rec.states.push_back(psi);
        rec.norms.push_back(psi.norm());
    });
    return rec;
}

void stream_evolution(const BandedUnitary& u, const State& psi0, Index K,
                      const std::function<void(Index, const State&)>& visit) {
    require_unit(psi0);
    evolve_into(u, psi0, K, visit);
}

double Profile::sum() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

Profile site_probabilities(const State& psi) {
    Profile p{psi.first(), std::vector<double>(psi.amplitudes.size())};
    for (std::size_t i = 0; i < psi.amplitudes.size(); ++i) p.values[i] = std::norm(psi.amplitudes[i]);
    return p;
}

Profile cesaro_profile(const EvolutionRecord& rec, Index K) {
    if (K < 1 || K > rec.horizon()) fail(ErrorKind::input, "averaging horizon out of range");
    Profile acc;
    for (Index k = 0; k < K; ++k) add_into(acc, rec.states[static_cast<std::size_t>(k)]);
    for (double& v : acc.values) v /= static_cast<double>(K);
    return acc;
}

double TransportSeries::p_in_avg(std::size_t r, Index K) const { return running_mean(p_in, r, K); }
double TransportSeries::p_out_avg(std::size_t r, Index K) const { return running_mean(p_out, r, K); }
double TransportSeries::moment_avg(std::size_t p, Index K) const { return running_mean(moments, p, K); }

TransportSeries transport_profile(const EvolutionRecord& rec, const std::vector<double>& radii,
                                  const std::vector<double>& powers) {
    if (rec.horizon() < 1) fail(ErrorKind::input, "empty evolution record");
    TransportSeries s = empty_series(radii, powers);
    StepAccumulator step{s};
    for (Index k = 0; k < rec.horizon(); ++k) step(k, rec.states[static_cast<std::size_t>(k)]);
    finish_cesaro(s);
    return s;
}

TransportSeries transport_profile(const BandedUnitary& u, const State& psi0, Index K,
                                  const std::vector<double>& radii, const std::vector<double>& powers) {
    TransportSeries s = empty_series(radii, powers);
    StepAccumulator step{s};
    stream_evolution(u, psi0, K, std::ref(step));
    finish_cesaro(s);
    return s;
}

Index exponential_cutoff(Index K, double tol) {
    if (K < 1) fail(ErrorKind::input, "horizon K must be positive");
    // (2/K) e^{-2 k_c/K} / (1 - e^{-2/K}) < tol
    const double kk = static_cast<double>(K);
    const double head = (2.0 / kk) / -std::expm1(-2.0 / kk);
    return static_cast<Index>(std::ceil(0.5 * kk * std::log(head / tol)));
}

double time_average(const std::vector<double>& f, Index K, AverageMode mode) {
    if (K < 1) fail(ErrorKind::input, "horizon K must be positive");
    if (mode == AverageMode::cesaro) {
        if (static_cast<Index>(f.size()) < K) fail(ErrorKind::input, "sequence shorter than the averaging horizon");
        double s = 0.0;
        for (Index j = 0; j < K; ++j) s += f[static_cast<std::size_t>(j)];
        return s / static_cast<double>(K);
    }
    const Index kc = exponential_cutoff(K);
    if (static_cast<Index>(f.size()) < kc) {
        fail(ErrorKind::input, "exponential average needs " + std::to_string(kc) + " samples, got " +
                                   std::to_string(f.size()));
    }
    const double q = std::exp(-2.0 / static_cast<double>(K));
    double s = 0.0, w = 1.0;
    for (Index k = 0; k < kc; ++k, w *= q) s += w * f[static_cast<std::size_t>(k)];
    return 2.0 * s / static_cast<double>(K);
}

ExponentEstimate transport_exponent(const std::vector<std::pair<Index, double>>& curve, double p) {
    if (curve.size() < 2) fail(ErrorKind::input, "exponent fit needs at least two samples");
    if (!(p > 0.0)) fail(ErrorKind::input, "moment power must be positive");
    std::vector<double> x, y;
    for (const auto& [K, v] : curve) {
        if (K < 1 || !(v > 0.0)) fail(ErrorKind::input, "exponent fit needs K >= 1 and positive moments");
        x.push_back(std::log(static_cast<double>(K)));
        y.push_back(std::log(v));
    }
    const auto n = static_cast<double>(x.size());
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
    if (sxx == 0.0) fail(ErrorKind::input, "exponent fit needs distinct K values");
    auto clamp = [](double b) { return std::clamp(b, 0.0, 1.0); };
    ExponentEstimate e;
    e.estimate = clamp(sxy / sxx / p);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double s = (y[i] - y[i - 1]) / (x[i] - x[i - 1]) / p;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    e.lower = clamp(lo);
    e.upper = clamp(hi);
    return e;
}

Index default_quad_nodes(Index K) {
    // Trapezoid aliasing error decays like e^{-M/K}; this leaves ~1e-11 relative error.
    return static_cast<Index>(std::ceil(static_cast<double>(K) * std::log(1e11)));
}

ParsevalResult parseval_check(const BandedUnitary& u, const State& psi, Index n, Index K,
                              const ParsevalOptions& options) {
    if (K < 1) fail(ErrorKind::input, "horizon K must be positive");
    const Index nodes = options.quad_nodes > 0 ? options.quad_nodes : default_quad_nodes(K);
    if (nodes < 4 * K) fail(ErrorKind::input, "quadrature needs at least 4K nodes");
    // Resolvent entries decay roughly like e^{-|m|/K} away from supp psi; 8K sites already gives ~1e-10.
    const Index radius = options.window_radius > 0 ? options.window_radius : 16 * K;
    const double kk = static_cast<double>(K);

    ParsevalResult res;
    res.quad_nodes = nodes;
    res.window_radius = radius;

    // Left side: exact evolution until the remaining exponential weight is negligible.
    {
        const Index kc = exponential_cutoff(K, 1e-20);
        const double q = std::exp(-2.0 / kk);
        double w = 1.0, s = 0.0;
        stream_evolution(u, psi, kc, [&](Index, const State& x) {
            s += w * std::norm(x.at(n));
            w *= q;
        });
        res.lhs = s;
    }

    // Right side: banded solves (U_W - z) x = psi on the window W around supp psi.
    const Window support = psi.support();
    constexpr Index max_window = Index{1} << 26;
    Window want = intersect({support.lo - radius, support.hi + radius}, u.domain());
    if (want.size() > max_window) {
        throw ResourceError("resolvent window of " + std::to_string(want.size()) + " sites exceeds the limit", 0);
    }
    BandedUnitary op = u;
    if (u.extensible()) {
        op = u.with_window(want);
    } else {
        // A fixed operator may only fall short of the window where it is closed (domain edge).
        const bool short_lo = u.window().lo > want.lo && u.window().lo > u.domain().lo;
        const bool short_hi = u.window().hi < want.hi && u.window().hi < u.domain().hi;
        if (short_lo || short_hi) fail(ErrorKind::capability, "fixed operator window is too small for the resolvent");
        want = intersect(want, u.window());
    }
    const Window w = intersect(want, op.window());
    if (!w.contains(n) || !w.contains(support)) fail(ErrorKind::input, "site or state outside the resolvent window");

    constexpr int kl = BandedUnitary::bandwidth, ku = BandedUnitary::bandwidth, ldab = 2 * kl + ku + 1;
    const Index dim = w.size();
    std::vector<Complex> band(static_cast<std::size_t>(ldab * dim), 0.0);
    for (Index c = w.lo; c < w.hi; ++c) {
        for (Index r = std::max(w.lo, c - ku); r <= std::min(w.hi - 1, c + kl); ++r) {
            const Index j = c - w.lo, i = r - w.lo;
            band[static_cast<std::size_t>(kl + ku + i - j + j * ldab)] = op(r, c);
        }
    }
    std::vector<Complex> rhs0(static_cast<std::size_t>(dim), 0.0);
    for (Index m = support.lo; m < support.hi; ++m) rhs0[static_cast<std::size_t>(m - w.lo)] = psi.at(m);

    const double radius_z = std::exp(1.0 / kk);
    std::vector<double> values(static_cast<std::size_t>(nodes));
    const unsigned workers = options.workers > 0 ? options.workers : default_workers();
    parallel_for(static_cast<std::size_t>(nodes), workers, [&](std::size_t j) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(nodes);
        const Complex z = std::polar(radius_z, theta);
        std::vector<Complex> ab = band;
        for (Index c = 0; c < dim; ++c) ab[static_cast<std::size_t>(kl + ku + c * ldab)] -= z;
        std::vector<Complex> x = rhs0;
        BandedLu(std::move(ab), dim, kl, ku).solve(x);
        values[j] = std::norm(x[static_cast<std::size_t>(n - w.lo)]);
    });
    double s = 0.0;
    for (double v : values) s += v;
    res.rhs = std::exp(2.0 / kk) * s / static_cast<double>(nodes);

    if (res.lhs == 0.0) res.reldiff = res.rhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else res.reldiff = std::abs(res.lhs - res.rhs) / res.lhs;
    return res;
}

BoundTable pin_bound_check(const std::function<double(double, Index)>& p_in_tilde, double alpha,
                           const std::vector<double>& n_grid, const std::vector<Index>& k_grid) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::input, "alpha must lie in [0, 1]");
    if (n_grid.empty() || k_grid.empty()) fail(ErrorKind::input, "grids must be nonempty");
    std::vector<BoundRow> rows;
    for (double N : n_grid) {
        for (Index K : k_grid) {
            if (alpha == 1.0 && K < 2) fail(ErrorKind::input, "the alpha = 1 bound needs K >= 2");
            const double kk = static_cast<double>(K);
            BoundRow row{N, K, p_in_tilde(N, K), 0.0, 0.0};
            row.bound = alpha == 1.0 ? N * std::log(kk) / kk : N * std::pow(kk, -alpha);
            row.ratio = row.value / row.bound;
            rows.push_back(row);
        }
    }
    return summarise(std::move(rows));
}

BoundTable pin_bound_check(const TransportSeries& series, double alpha, const std::vector<double>& n_grid,
                           const std::vector<Index>& k_grid) {
    return pin_bound_check([&](double N, Index K) { return series.p_in_avg(radius_index(series, N), K); }, alpha,
                           n_grid, k_grid);
}

double projection_trace_norm(double N, double p) {
    if (!(p > 0.0) || !(N >= 0.0)) fail(ErrorKind::input, "trace norm needs p > 0 and N >= 0");
    return std::pow(2.0 * std::floor(N) + 1.0, 1.0 / p);
}

BoundTable rage_check(const TransportSeries& series, double N, double p, double alpha,
                      const std::vector<Index>& k_grid) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::input, "alpha must lie in [0, 1]");
    if (k_grid.empty()) fail(ErrorKind::input, "K grid must be nonempty");
    const std::size_t r = radius_index(series, N);
    const double norm_p = projection_trace_norm(N, p);
    std::vector<BoundRow> rows;
    for (Index K : k_grid) {
        if (alpha == 1.0 && K < 2) fail(ErrorKind::input, "the alpha = 1 bound needs K >= 2");
        const double kk = static_cast<double>(K);
        BoundRow row{N, K, series.p_in_avg(r, K), 0.0, 0.0};
        row.bound = alpha == 1.0 ? norm_p * std::pow(std::log(kk) / kk, 1.0 / p) : norm_p * std::pow(kk, -alpha / p);
        row.ratio = row.value / row.bound;
        rows.push_back(row);
    }
    return summarise(std::move(rows));
}

}  // namespace cmvdyn
