#include "cmvdyn/qwalk.hpp"

#include "cmvdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace cmvdyn {

namespace {

constexpr double coin_tolerance = 1e-12;
// Below this modulus a diagonal entry has no meaningful phase.
constexpr double degenerate_modulus = 1e-14;

void check_coin(Index n, const Coin& c) {
    const double defect = c.unitarity_defect();
    if (!(defect <= coin_tolerance)) {
        std::ostringstream os;
        os << "coin at site " << n << " is not unitary (defect " << defect << ")";
        fail(ErrorKind::domain, os.str());
    }
}

Index floor_half(Index r) { return r >= 0 ? r / 2 : -((-r + 1) / 2); }

}  // namespace

Eigen::Matrix2cd Coin::matrix() const {
    Eigen::Matrix2cd m;
    m << c11, c12, c21, c22;
    return m;
}

double Coin::unitarity_defect() const {
    const Eigen::Matrix2cd m = matrix();
    return (m * m.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
}

Coin identity_coin() { return {1.0, 0.0, 0.0, 1.0}; }

Coin rotation_coin(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
}

CoinSequence::CoinSequence(std::map<Index, Coin> coins) : table_(std::move(coins)) {
    for (const auto& [n, c] : table_) check_coin(n, c);
}

CoinSequence::CoinSequence(Generator generator, Window range) : generator_(std::move(generator)), range_(range) {}

bool CoinSequence::contains(Index n) const noexcept {
    if (generator_) return range_.contains(n);
    return table_.count(n) != 0;
}

Coin CoinSequence::coin(Index n) const {
    if (generator_) {
        if (!range_.contains(n)) fail(ErrorKind::configuration, "missing coin at site " + std::to_string(n));
        Coin c = generator_(n);
        check_coin(n, c);
        return c;
    }
    auto it = table_.find(n);
    if (it == table_.end()) fail(ErrorKind::configuration, "missing coin at site " + std::to_string(n));
    return it->second;
}

CoinSequence constant_coins(const Coin& c) {
    check_coin(0, c);
    return CoinSequence([c](Index) { return c; });
}

CoinSequence rotation_coins(double theta) { return constant_coins(rotation_coin(theta)); }

CoinSequence rotation_coins(std::function<double(Index)> theta, Window range) {
    return CoinSequence([theta = std::move(theta)](Index n) { return rotation_coin(theta(n)); }, range);
}

CoinSequence random_coins(std::uint64_t seed, Window range) {
    return CoinSequence(
        [seed](Index n) {
            const auto k = static_cast<std::uint64_t>(n);
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> g;
            Complex a(g(rng), g(rng)), b(g(rng), g(rng));
            const double r = std::sqrt(std::norm(a) + std::norm(b));
            a /= r;
            b /= r;
            const Complex phase = std::polar(1.0, std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng));
            return Coin{phase * a, -phase * std::conj(b), phase * b, phase * std::conj(a)};
        },
        range);
}

CoinSequence read_coins(std::istream& in) {
    std::map<Index, Coin> table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Index n;
        if (!(ls >> n)) continue;
        double v[8];
        for (double& x : v) {
            if (!(ls >> x)) fail(ErrorKind::input, "line " + std::to_string(line_no) + ": expected n and 8 reals");
        }
        const Coin c{{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}};
        if (!table.emplace(n, c).second) {
            fail(ErrorKind::input, "line " + std::to_string(line_no) + ": duplicate site " + std::to_string(n));
        }
    }
    return CoinSequence(std::move(table));
}

void write_coins(std::ostream& out, const CoinSequence& coins, Window sites) {
    const auto old = out.precision(17);
    for (Index n = sites.lo; n < sites.hi; ++n) {
        const Coin c = coins.coin(n);
        out << n;
        for (Complex x : {c.c11, c.c12, c.c21, c.c22}) out << ' ' << x.real() << ' ' << x.imag();
        out << '\n';
    }
    out.precision(old);
}

BandedUnitary build_walk_operator(const CoinSequence& coins, Window window, WalkConvention convention) {
    constexpr int b = BandedUnitary::bandwidth;
    BandedUnitary::ColumnSource source;
    if (convention == WalkConvention::update_rule) {
        // Column of |n,s> holds the image under one step: rows 2n+2 (up at n+1) and 2n-1 (down at n-1).
        source = [coins](Index c, const Window& rows) {
            BandedUnitary::Column col{};
            const Index n = floor_half(c);
            const Index up = 2 * n + 2, down = 2 * n - 1;
            if (!rows.contains(up) && !rows.contains(down)) return col;
            const Coin k = coins.coin(n);
            const bool is_up = c == 2 * n;
            col[static_cast<std::size_t>(up - c + b)] = is_up ? k.c11 : k.c12;
            col[static_cast<std::size_t>(down - c + b)] = is_up ? k.c21 : k.c22;
            return col;
        };
    } else {
        source = [coins](Index c, const Window& rows) {
            BandedUnitary::Column col{};
            const Index m = floor_half(c);
            const bool even = c == 2 * m;
            // Even column 2m carries site m-1 on rows 2m-2, 2m-1; odd column 2m+1 carries site m+1 on rows 2m+2, 2m+3.
            const Index site = even ? m - 1 : m + 1;
            const Index r0 = 2 * site;
            if (!rows.contains(r0) && !rows.contains(r0 + 1)) return col;
            const Coin k = coins.coin(site);
            col[static_cast<std::size_t>(r0 - c + b)] = even ? k.c11 : k.c21;
            col[static_cast<std::size_t>(r0 + 1 - c + b)] = even ? k.c12 : k.c22;
            return col;
        };
    }
    return BandedUnitary::from_source(window, whole_line, std::move(source));
}

bool GaugePhases::covers(const Window& w) const {
    for (Index n = w.lo; n < w.hi; ++n)
        if (!lambdas.count(n)) return false;
    return true;
}

Complex GaugePhases::at(Index n) const {
    auto it = lambdas.find(n);
    if (it == lambdas.end()) fail(ErrorKind::configuration, "no gauge phase at index " + std::to_string(n));
    return it->second;
}

GaugeResult cgmv_gauge(const CoinSequence& coins, Window sites) {
    if (sites.size() < 1) fail(ErrorKind::input, "cgmv_gauge needs a nonempty site range");
    const Index a = sites.lo, b = sites.hi;
    const Index lo = std::min<Index>(a, 0), hi = std::max<Index>(b, 1);

    // Phase factors e^{i sigma^k_n} = c^kk_n / |c^kk_n|.
    std::map<Index, Complex> e1, e2;
    std::map<Index, Coin> used;
    for (Index n = lo; n < hi; ++n) {
        const Coin c = coins.coin(n);
        const double m11 = std::abs(c.c11), m22 = std::abs(c.c22);
        if (m11 < degenerate_modulus || m22 < degenerate_modulus || !(std::abs(c.c21) < 1.0)) {
            fail(ErrorKind::gauge_degenerate,
                 "coin at site " + std::to_string(n) + " has a vanishing diagonal entry; gauge phases undefined");
        }
        e1[n] = c.c11 / m11;
        e2[n] = c.c22 / m22;
        used[n] = c;
    }

    GaugePhases phases;
    auto& lam = phases.lambdas;
    // Renormalising each product keeps |lambda| = 1 to the last bit over long ranges.
    auto unit = [](Complex z) { return z / std::abs(z); };
    lam[0] = 1.0;
    lam[-1] = 1.0;
    // Even indices: forward lambda_{2n+2} = e^{-i s1_n} lambda_{2n}, inverted for n < 0.
    for (Index n = 0; 2 * (n + 1) < 2 * b; ++n) lam[2 * n + 2] = unit(std::conj(e1[n]) * lam[2 * n]);
    for (Index n = -1; n >= a; --n) lam[2 * n] = unit(e1[n] * lam[2 * n + 2]);
    // Odd indices: forward lambda_{2n+1} = e^{i s2_n} lambda_{2n-1}, inverted for n < 0.
    for (Index n = 0; n < b; ++n) lam[2 * n + 1] = unit(e2[n] * lam[2 * n - 1]);
    for (Index n = -1; n >= a; --n) lam[2 * n - 1] = unit(std::conj(e2[n]) * lam[2 * n + 1]);

    std::map<Index, Complex> alpha;
    for (Index k = 2 * a - 1; k < 2 * b; ++k) alpha[k] = 0.0;
    for (Index n = a; n < b; ++n) alpha[2 * n] = lam.at(2 * n) / lam.at(2 * n - 1) * std::conj(used.at(n).c21);

    // Keep only the phases on the promised range.
    for (auto it = lam.begin(); it != lam.end();) {
        if (it->first < 2 * a - 1 || it->first >= 2 * b) it = lam.erase(it);
        else ++it;
    }
    return {std::move(phases), VerblunskySequence(std::move(alpha), false)};
}

double verify_gauge_equivalence(const BandedUnitary& u, const GaugePhases& phases, const BandedUnitary& e) {
    if (!(u.window() == e.window())) fail(ErrorKind::alignment, "walk and CMV windows differ");
    const Window w = u.window();
    if (!phases.covers(w)) fail(ErrorKind::configuration, "gauge phases do not cover the window");
    const Window cols = intersect(u.interior(), e.interior());
    double dev = 0.0;
    for (Index c = cols.lo; c < cols.hi; ++c) {
        for (Index r = std::max(w.lo, c - BandedUnitary::bandwidth);
             r < std::min(w.hi, c + BandedUnitary::bandwidth + 1); ++r) {
            const Complex g = std::conj(phases.at(r)) * u(r, c) * phases.at(c);
            dev = std::max(dev, std::abs(g - e(r, c)));
        }
    }
    return dev;
}

}  // namespace cmvdyn
