#pragma once

// Fibonacci substitution a -> ab, b -> a, the quantum walk it drives, and the explicit
// lower-bound constants I(z), C(z), gamma_1(z), gamma_2(z), beta(z).

#include "cmvdyn/cmv.hpp"
#include "cmvdyn/qwalk.hpp"
#include "cmvdyn/types.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cmvdyn {

/// s_n = S^n(a); |s_n| = F_{n+2}.
struct FibonacciWord {
    std::string symbols;
    int level = 0;

    std::size_t size() const noexcept { return symbols.size(); }
};

inline constexpr std::size_t default_word_budget = std::size_t{1} << 28;

/// s_0 = a, s_1 = ab, s_{n+1} = s_n s_{n-1}. Throws ResourceError (carrying the largest
/// admissible level) when |s_n| exceeds `budget` symbols.
FibonacciWord fib_word(int n, std::size_t budget = default_word_budget);

/// omega_n = a iff floor((n+2)/phi) - floor((n+1)/phi) = 1, evaluated in exact integer
/// arithmetic. For n >= 0 this is the fixed point u = abaababaabaab...
/// |n| may not exceed 1.8e9.
char subshift_symbol(Index n);

/// omega[offset, offset + length).
std::string subshift_window(Index offset, Index length);

inline constexpr double default_K = 16.0;

struct FibonacciParams {
    double theta_a = 0.0;
    double theta_b = 0.0;
    /// K(z); when empty the constant default_K is used.
    std::function<double(Complex)> K_of_z;

    double theta(char symbol) const;
    double K(Complex z) const;
    /// Both angles strictly inside (-pi/2, pi/2), else a domain error.
    void validate() const;
};

FibonacciParams fibonacci_params(double theta_a, double theta_b, double K = default_K);

/// Rotation coins C_{omega_n} at sites offset + i for the symbols of `word`.
CoinSequence coins_from_word(std::string_view word, const FibonacciParams& params, Index offset = 0);

/// Coins of the two-sided subshift element omega on `range`.
CoinSequence fibonacci_coins(const FibonacciParams& params, Window range = whole_line);

/// Half-line restriction of the gauged walk: alpha_{2n} = sin theta_{u_n}, alpha_odd = 0,
/// defined on [0, count).
VerblunskySequence fibonacci_verblunsky(const FibonacciParams& params, Index count);

double invariant_I(Complex z, const FibonacciParams& params);
/// max{2 + sqrt(8 + I), cos theta_a, cos theta_b}; domain error when I < -8.
double constant_C(Complex z, const FibonacciParams& params);
/// log(1 + 1/(4 C^2)) / (16 log phi).
double gamma1(Complex z, const FibonacciParams& params);
/// 4 log2 K(z); domain error unless K(z) > 1.
double gamma2(Complex z, const FibonacciParams& params);
/// 2 gamma1 / (gamma1 + 2 gamma2 + 1).
double beta_lower_bound(Complex z, const FibonacciParams& params);
double beta_from_exponents(double gamma1, double gamma2);

struct TheoremConstants {
    double I = 0.0;
    double C = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double beta = 0.0;
    double K = 0.0;
};

TheoremConstants theorem_constants(Complex z, const FibonacciParams& params);

struct TraceMapRow {
    int n = 0;
    double x = 0.0;             // +-inf once |x_n| leaves the double range
    double log10_abs_x = 0.0;
    double fricke = 0.0;        // x_{n+1}^2 + x_n^2 + x_{n-1}^2 - 2 x_{n+1} x_n x_{n-1} - 1
};

struct TraceMapDiagnostic {
    std::vector<TraceMapRow> rows;  // n = 0 .. n_max
    double invariant_I = 0.0;       // reported next to the Fricke value, not compared
    double max_step = 0.0;          // max_n |fricke_{n+1} - fricke_n|
    long precision_bits = 0;
    double precision_check = 0.0;   // max |fricke| change when 64 more bits are used

    bool conserved(double tol = 1e-8) const noexcept { return max_step <= tol; }
};

/// Traces x_n = tr(T_{s_n}) / 2 of the determinant-normalized Fibonacci blocks.
///
/// One letter theta spans alpha_{2n} = sin theta, alpha_{2n+1} = 0, and
/// z^{-1} T(z, 0) T(z, sin theta) = sec theta [[z, -sin theta], [-sin theta, conj z]]
/// has determinant 1, so no root of z is needed. T_{s_{-1}} is the b block, T_{s_0} the
/// a block and T_{s_{n+1}} = T_{s_{n-1}} T_{s_n}.
///
/// Off the spectrum x_n grows like 10^{F_n}, and fricke_n is an O(1) difference of terms
/// of size x^3, so the products run in MPFR at about 2 log2 max|T| + 96 bits. z is taken
/// as exp(i arg z), exactly unimodular at that precision. Requires n_max in [1, 25].
TraceMapDiagnostic trace_map_diagnostic(Complex z, const FibonacciParams& params, int n_max = 20);

struct SpectralBeta {
    std::vector<Complex> support;  // atoms of the truncation with positive weight
    std::vector<double> beta;      // beta(z) at each atom
    double max_beta = 0.0;
    Complex argmax{1.0, 0.0};
    Index n = 0;
};

inline constexpr Index default_truncation = 1024;

/// max beta(z) over the atoms of the size-n paraorthogonal truncation of
/// fibonacci_verblunsky; an inner approximation of supp mu.
SpectralBeta max_beta_on_spectrum(const FibonacciParams& params, Index n = default_truncation);

}  // namespace cmvdyn
