#include "cmvdyn/fibonacci.hpp"

#include "cmvdyn/error.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace cmvdyn {
namespace {

constexpr Index subshift_limit = 1'800'000'000;

std::uint64_t isqrt(std::uint64_t v) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(v)));
    while (r > 0 && r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

Index floor_half(Index x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

// floor(m / phi) = floor(m (sqrt5 - 1) / 2). m sqrt5 is irrational for m != 0, so
// floor(m sqrt5) is isqrt(5 m^2) or its negative minus one, and the halving only
// needs the parity of floor(m sqrt5) - m.
Index floor_over_phi(Index m) {
    if (m == 0) return 0;
    const auto a = static_cast<std::uint64_t>(m > 0 ? m : -m);
    const auto s = static_cast<Index>(isqrt(5 * a * a));
    const Index q = m > 0 ? s : -s - 1;
    return floor_half(q - m);
}

void require_unimodular(Complex z) {
    if (std::abs(std::abs(z) - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "z = " << z << " is not on the unit circle";
        fail(ErrorKind::domain, os.str());
    }
}

// SU(1,1)-shaped block [[a, b], [conj b, conj a]]; products of such blocks keep the shape.
struct MpBlock {
    mpfr_t ar, ai, br, bi;

    explicit MpBlock(mpfr_prec_t p) { mpfr_inits2(p, ar, ai, br, bi, static_cast<mpfr_ptr>(nullptr)); }
    ~MpBlock() { mpfr_clears(ar, ai, br, bi, static_cast<mpfr_ptr>(nullptr)); }
    MpBlock(const MpBlock&) = delete;
    MpBlock& operator=(const MpBlock&) = delete;
};

class MpScratch {
public:
    explicit MpScratch(mpfr_prec_t p) { mpfr_init2(v_, p); }
    ~MpScratch() { mpfr_clear(v_); }
    MpScratch(const MpScratch&) = delete;
    MpScratch& operator=(const MpScratch&) = delete;

    mpfr_ptr get() noexcept { return v_; }

private:
    mpfr_t v_;
};

// out += sign * x * y
void fma_into(mpfr_ptr out, mpfr_srcptr x, mpfr_srcptr y, int sign, mpfr_ptr t) {
    mpfr_mul(t, x, y, MPFR_RNDN);
    if (sign > 0) mpfr_add(out, out, t, MPFR_RNDN);
    else mpfr_sub(out, out, t, MPFR_RNDN);
}

// C = A B with a_C = a_A a_B + b_A conj(b_B), b_C = a_A b_B + b_A conj(a_B).
void multiply(MpBlock& c, const MpBlock& a, const MpBlock& b, mpfr_ptr t) {
    mpfr_mul(c.ar, a.ar, b.ar, MPFR_RNDN);
    fma_into(c.ar, a.ai, b.ai, -1, t);
    fma_into(c.ar, a.br, b.br, +1, t);
    fma_into(c.ar, a.bi, b.bi, +1, t);

    mpfr_mul(c.ai, a.ar, b.ai, MPFR_RNDN);
    fma_into(c.ai, a.ai, b.ar, +1, t);
    fma_into(c.ai, a.bi, b.br, +1, t);
    fma_into(c.ai, a.br, b.bi, -1, t);

    mpfr_mul(c.br, a.ar, b.br, MPFR_RNDN);
    fma_into(c.br, a.ai, b.bi, -1, t);
    fma_into(c.br, a.br, b.ar, +1, t);
    fma_into(c.br, a.bi, b.ai, +1, t);

    mpfr_mul(c.bi, a.ar, b.bi, MPFR_RNDN);
    fma_into(c.bi, a.ai, b.br, +1, t);
    fma_into(c.bi, a.bi, b.ar, +1, t);
    fma_into(c.bi, a.br, b.ai, -1, t);
}

struct TracePass {
    std::vector<double> x, log10_abs_x, fricke;
};

// Blocks s_{-1} .. s_{n_max + 1}; fricke_n uses blocks n, n + 1, n + 2 of that list.
TracePass trace_pass(double phase, double theta_a, double theta_b, int n_max, mpfr_prec_t p) {
    MpScratch angle(p), zr(p), zi(p), s(p), c(p), t(p), f(p);
    mpfr_set_d(angle.get(), phase, MPFR_RNDN);
    mpfr_sin_cos(zi.get(), zr.get(), angle.get(), MPFR_RNDN);

    std::deque<MpBlock> blocks;
    auto letter = [&](double theta) {
        MpBlock& m = blocks.emplace_back(p);
        mpfr_set_d(angle.get(), theta, MPFR_RNDN);
        mpfr_sin_cos(s.get(), c.get(), angle.get(), MPFR_RNDN);
        mpfr_div(m.ar, zr.get(), c.get(), MPFR_RNDN);
        mpfr_div(m.ai, zi.get(), c.get(), MPFR_RNDN);
        mpfr_div(m.br, s.get(), c.get(), MPFR_RNDN);
        mpfr_neg(m.br, m.br, MPFR_RNDN);
        mpfr_set_zero(m.bi, 1);
    };
    letter(theta_b);
    letter(theta_a);
    for (int k = 1; k <= n_max + 1; ++k) {
        const std::size_t last = blocks.size() - 1;
        MpBlock& next = blocks.emplace_back(p);
        multiply(next, blocks[last - 1], blocks[last], t.get());
    }

    TracePass out;
    for (const auto& m : blocks) {
        // x = Re a since tr [[a, b], [conj b, conj a]] = 2 Re a.
        out.x.push_back(mpfr_get_d(m.ar, MPFR_RNDN));
        if (mpfr_zero_p(m.ar)) {
            out.log10_abs_x.push_back(-std::numeric_limits<double>::infinity());
        } else {
            mpfr_abs(t.get(), m.ar, MPFR_RNDN);
            mpfr_log10(t.get(), t.get(), MPFR_RNDN);
            out.log10_abs_x.push_back(mpfr_get_d(t.get(), MPFR_RNDN));
        }
    }
    for (int n = 0; n <= n_max; ++n) {
        mpfr_srcptr prev = blocks[n].ar, cur = blocks[n + 1].ar, next = blocks[n + 2].ar;
        mpfr_sqr(f.get(), next, MPFR_RNDN);
        mpfr_sqr(t.get(), cur, MPFR_RNDN);
        mpfr_add(f.get(), f.get(), t.get(), MPFR_RNDN);
        mpfr_sqr(t.get(), prev, MPFR_RNDN);
        mpfr_add(f.get(), f.get(), t.get(), MPFR_RNDN);
        mpfr_mul(t.get(), next, cur, MPFR_RNDN);
        mpfr_mul(t.get(), t.get(), prev, MPFR_RNDN);
        mpfr_mul_2ui(t.get(), t.get(), 1, MPFR_RNDN);
        mpfr_sub(f.get(), f.get(), t.get(), MPFR_RNDN);
        mpfr_sub_ui(f.get(), f.get(), 1, MPFR_RNDN);
        out.fricke.push_back(mpfr_get_d(f.get(), MPFR_RNDN));
    }
    return out;
}

// log2 of the largest block entry along the recursion, from rescaled double products.
double log2_block_size(Complex z, double theta_a, double theta_b, int n_max) {
    using Block = std::array<Complex, 4>;
    struct Scaled {
        Block m;
        double log2_scale;
    };
    auto rescale = [](Block m, double lg) {
        double big = 0.0;
        for (const auto& e : m) big = std::max(big, std::abs(e));
        for (auto& e : m) e /= big;
        return Scaled{m, lg + std::log2(big)};
    };
    auto letter = [&](double theta) {
        const double s = std::sin(theta), c = std::cos(theta);
        return rescale(Block{z / c, -s / c, -s / c, std::conj(z) / c}, 0.0);
    };
    std::vector<Scaled> chain{letter(theta_b), letter(theta_a)};
    double worst = std::max(chain[0].log2_scale, chain[1].log2_scale);
    for (int k = 1; k <= n_max + 1; ++k) {
        const Block& a = chain[chain.size() - 2].m;
        const Block& b = chain.back().m;
        const Block prod{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
                         a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
        chain.push_back(rescale(prod, chain[chain.size() - 2].log2_scale + chain.back().log2_scale));
        worst = std::max(worst, chain.back().log2_scale);
    }
    return worst;
}

}  // namespace

FibonacciWord fib_word(int n, std::size_t budget) {
    if (n < 0) fail(ErrorKind::domain, "Fibonacci level must be nonnegative");
    // |s_k| = F_{k+2}
    int admissible = -1;
    std::size_t shorter = 1, longer = 2;
    for (int k = 0; k <= n && shorter <= budget; ++k) {
        admissible = k;
        const std::size_t next = shorter + longer;
        shorter = longer;
        longer = next;
    }
    if (n > admissible) {
        std::ostringstream os;
        os << "s_" << n << " exceeds the word budget of " << budget << " symbols";
        throw ResourceError(os.str(), admissible);
    }

    std::string older = "a", newer = "ab";
    if (n == 0) return {older, 0};
    for (int k = 1; k < n; ++k) {
        std::string next = newer + older;
        older = std::move(newer);
        newer = std::move(next);
    }
    return {std::move(newer), n};
}

char subshift_symbol(Index n) {
    if (n < -subshift_limit || n > subshift_limit) {
        std::ostringstream os;
        os << "subshift index " << n << " is outside [-" << subshift_limit << ", " << subshift_limit << "]";
        fail(ErrorKind::domain, os.str());
    }
    return floor_over_phi(n + 2) - floor_over_phi(n + 1) == 1 ? 'a' : 'b';
}

std::string subshift_window(Index offset, Index length) {
    if (length < 1) fail(ErrorKind::domain, "window length must be positive");
    std::string out;
    out.reserve(static_cast<std::size_t>(length));
    for (Index n = offset; n < offset + length; ++n) out.push_back(subshift_symbol(n));
    return out;
}

double FibonacciParams::theta(char symbol) const {
    if (symbol == 'a') return theta_a;
    if (symbol == 'b') return theta_b;
    fail(ErrorKind::input, std::string("symbol '") + symbol + "' is not in {a, b}");
}

double FibonacciParams::K(Complex z) const { return K_of_z ? K_of_z(z) : default_K; }

void FibonacciParams::validate() const {
    const double half_pi = std::numbers::pi / 2.0;
    for (double t : {theta_a, theta_b}) {
        if (!(std::abs(t) < half_pi)) {
            std::ostringstream os;
            os << "angle " << t << " is outside (-pi/2, pi/2)";
            fail(ErrorKind::domain, os.str());
        }
    }
}

FibonacciParams fibonacci_params(double theta_a, double theta_b, double K) {
    FibonacciParams p{theta_a, theta_b, [K](Complex) { return K; }};
    p.validate();
    return p;
}

CoinSequence coins_from_word(std::string_view word, const FibonacciParams& params, Index offset) {
    params.validate();
    std::map<Index, Coin> coins;
    for (std::size_t i = 0; i < word.size(); ++i)
        coins.emplace(offset + static_cast<Index>(i), rotation_coin(params.theta(word[i])));
    return CoinSequence(std::move(coins));
}

CoinSequence fibonacci_coins(const FibonacciParams& params, Window range) {
    params.validate();
    const double ta = params.theta_a, tb = params.theta_b;
    return rotation_coins([ta, tb](Index n) { return subshift_symbol(n) == 'a' ? ta : tb; }, range);
}

VerblunskySequence fibonacci_verblunsky(const FibonacciParams& params, Index count) {
    if (count < 1) fail(ErrorKind::domain, "coefficient count must be positive");
    const Index sites = (count + 1) / 2 + 1;
    const auto coins = fibonacci_coins(params, {-1, sites + 1});
    return cgmv_gauge(coins, {0, sites}).alphas.restricted_to_half_line();
}

double invariant_I(Complex z, const FibonacciParams& params) {
    require_unimodular(z);
    params.validate();
    const double a = params.theta_a, b = params.theta_b;
    const double sec_a = 1.0 / std::cos(a), sec_b = 1.0 / std::cos(b);
    const double re = z.real();
    const double re_sq = (z * z).real();
    const double mixed = re_sq * sec_a * sec_b - std::tan(a) * std::tan(b);
    return re * re * (sec_a * sec_a + sec_b * sec_b) + mixed * mixed -
           2.0 * (re * re * sec_a * sec_a * sec_b * sec_b * (re_sq - std::sin(a) * std::sin(b))) - 1.0;
}

double constant_C(Complex z, const FibonacciParams& params) {
    const double I = invariant_I(z, params);
    if (I < -8.0) {
        std::ostringstream os;
        os << "I(z) = " << I << " < -8 at z = " << z << "; C(z) is undefined";
        fail(ErrorKind::domain, os.str());
    }
    return std::max({2.0 + std::sqrt(8.0 + I), std::cos(params.theta_a), std::cos(params.theta_b)});
}

double gamma1(Complex z, const FibonacciParams& params) {
    const double C = constant_C(z, params);
    return std::log1p(1.0 / (4.0 * C * C)) / (16.0 * std::log(std::numbers::phi));
}

double gamma2(Complex z, const FibonacciParams& params) {
    const double K = params.K(z);
    if (!(K > 1.0) || !std::isfinite(K)) {
        std::ostringstream os;
        os << "K(z) = " << K << " at z = " << z << " must be finite and > 1";
        fail(ErrorKind::domain, os.str());
    }
    return 4.0 * std::log2(K);
}

double beta_from_exponents(double g1, double g2) { return 2.0 * g1 / (g1 + 2.0 * g2 + 1.0); }

double beta_lower_bound(Complex z, const FibonacciParams& params) {
    return beta_from_exponents(gamma1(z, params), gamma2(z, params));
}

TheoremConstants theorem_constants(Complex z, const FibonacciParams& params) {
    TheoremConstants t;
    t.I = invariant_I(z, params);
    t.C = constant_C(z, params);
    t.gamma1 = gamma1(z, params);
    t.K = params.K(z);
    t.gamma2 = gamma2(z, params);
    t.beta = beta_from_exponents(t.gamma1, t.gamma2);
    return t;
}

TraceMapDiagnostic trace_map_diagnostic(Complex z, const FibonacciParams& params, int n_max) {
    require_unimodular(z);
    params.validate();
    if (n_max < 1 || n_max > 25) fail(ErrorKind::domain, "n_max must lie in [1, 25]");

    const double phase = std::arg(z);
    const double size = std::max(0.0, log2_block_size(z, params.theta_a, params.theta_b, n_max));
    auto bits = static_cast<mpfr_prec_t>(2.0 * size) + 96;
    constexpr mpfr_prec_t max_bits = mpfr_prec_t{1} << 24;

    for (;;) {
        const TracePass low = trace_pass(phase, params.theta_a, params.theta_b, n_max, bits);
        const TracePass high = trace_pass(phase, params.theta_a, params.theta_b, n_max, bits + 64);
        double change = 0.0, scale = 1.0;
        for (std::size_t i = 0; i < high.fricke.size(); ++i) {
            change = std::max(change, std::abs(high.fricke[i] - low.fricke[i]));
            scale = std::max(scale, std::abs(high.fricke[i]));
        }
        if (change <= 1e-12 * scale) {
            TraceMapDiagnostic d;
            d.invariant_I = invariant_I(z, params);
            d.precision_bits = static_cast<long>(bits + 64);
            d.precision_check = change;
            for (int n = 0; n <= n_max; ++n) {
                const auto k = static_cast<std::size_t>(n + 1);
                d.rows.push_back({n, high.x[k], high.log10_abs_x[k], high.fricke[static_cast<std::size_t>(n)]});
            }
            for (int n = 0; n < n_max; ++n)
                d.max_step = std::max(d.max_step, std::abs(d.rows[n + 1].fricke - d.rows[n].fricke));
            return d;
        }
        if (bits >= max_bits) {
            std::ostringstream os;
            os << "trace map at z = " << z << " did not stabilise below " << max_bits << " bits";
            fail(ErrorKind::numerical, os.str());
        }
        bits = std::min(max_bits, bits + bits / 2);
    }
}

SpectralBeta max_beta_on_spectrum(const FibonacciParams& params, Index n) {
    if (n < 2) fail(ErrorKind::domain, "truncation size must be at least 2");
    const auto mu = paraorthogonal_spectrum(fibonacci_verblunsky(params, n), n);
    SpectralBeta out;
    out.n = n;
    out.max_beta = -1.0;
    for (const auto& atom : mu.atoms()) {
        if (!(atom.w > 0.0)) continue;
        const Complex z = atom.z / std::abs(atom.z);
        const double b = beta_lower_bound(z, params);
        out.support.push_back(z);
        out.beta.push_back(b);
        if (b > out.max_beta) {
            out.max_beta = b;
            out.argmax = z;
        }
    }
    if (out.support.empty()) fail(ErrorKind::numerical, "truncation produced no atom of positive weight");
    return out;
}

}  // namespace cmvdyn
