#pragma once

// Transfer matrices, orthogonal polynomials on the unit circle and power-law growth of
// solutions, the inputs of subordinacy-type continuity criteria.

#include "cmvdyn/cmv.hpp"
#include "cmvdyn/discrete_measure.hpp"
#include "cmvdyn/types.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace cmvdyn {

using TransferMatrix = Eigen::Matrix2cd;

/// rho^{-1} [[z, -conj(alpha)], [-alpha z, 1]], rho = sqrt(1 - |alpha|^2). det = z.
TransferMatrix transfer_matrix(Complex z, Complex alpha);

/// T_n(z) = T(z, alpha_{n-1}) ... T(z, alpha_0), T_0 = I (no rescaling).
TransferMatrix transfer_product(const VerblunskySequence& alphas, Complex z, Index n);

/// Polynomials of the first and second kind, (phi_n, phi*_n) = T_n (1, 1) and
/// (psi_n, psi*_n) = T_n (1, -1), for n = 0 .. n_max.
///
/// Whenever an entry exceeds 1e150 the running vectors are divided by their size and the
/// logarithm of the factor is added to the offset; the true value at n is the stored one
/// times exp(log_scale[n]).
struct OpucSequences {
    std::vector<Complex> phi, phi_star, psi, psi_star;
    std::vector<double> log_scale;

    Index n_max() const noexcept { return static_cast<Index>(phi.size()) - 1; }
};

OpucSequences opuc_polynomials(const VerblunskySequence& alphas, Complex z, Index n_max);

/// ||a||_L^2 = sum_{n <= floor L} |a_n|^2 + (L - floor L) |a_{floor L + 1}|^2; returns ||a||_L.
double local_norm(const std::vector<Complex>& a, double L);

/// Running local norms of one sequence, sampled at increasing L.
struct SolutionNorms {
    std::vector<double> L;
    std::vector<double> log_norms;  // log ||a||_L

    double norm(std::size_t i) const { return std::exp(log_norms[i]); }
};

inline constexpr Index default_length_budget = Index{1} << 26;

/// Unique L with (1 - r) ||phi(z)||_L ||psi(z)||_L = sqrt 2, by bracket doubling and bisection
/// to |dL| <= 1e-9 L. Throws ResourceError when the bracket needs more than `budget` terms.
double jl_length(const VerblunskySequence& alphas, Complex z, double r, Index budget = default_length_budget);

struct JlRow {
    double r = 0.0;
    double L = 0.0;
    double F_abs = 0.0;       // |F(r z)|
    double norm_ratio = 0.0;  // ||psi||_L / ||phi||_L
    double ratio = 0.0;       // F_abs / norm_ratio
    bool below_resolution = false;
};

struct JlRatioTable {
    std::vector<JlRow> rows;
    double band = 1.0;  // smallest A* with every ratio in [1/A*, A*]
    std::vector<std::string> warnings;
};

/// Compares |F(rz)| of `mu` with ||psi||_{L(r)} / ||phi||_{L(r)} computed from `alphas`.
JlRatioTable jl_ratio_check(const VerblunskySequence& alphas, const DiscreteMeasure& mu, Complex z,
                            const std::vector<double>& r_grid);

/// (xi_n, zeta_n) = T_n(z) (xi0, zeta0) on the right half-line; ||xi||_L at each requested L.
/// |xi0| = |zeta0| = 1 is required.
SolutionNorms whole_line_solution(const VerblunskySequence& alphas, Complex z, Complex xi0, Complex zeta0,
                                  const std::vector<double>& L_samples);

/// Initial conditions (1, e^{2 pi i k / count}), k = 0 .. count-1.
std::vector<std::pair<Complex, Complex>> boundary_conditions(int count = 8);

/// L = 2^first .. 2^last.
std::vector<double> dyadic_lengths(int first = 6, int last = 16);

struct PowerLawFit {
    double gamma1 = 0.0;  // smallest slope over boundary conditions
    double gamma2 = 0.0;  // largest slope
    double alpha = 0.0;   // 2 gamma1 / (gamma1 + gamma2)
    std::vector<double> slopes;
};

/// Least-squares slope of log ||xi||_L against log L for each boundary condition.
/// Needs at least 8 samples for each of at least 8 boundary conditions.
PowerLawFit power_law_fit(const std::vector<SolutionNorms>& per_condition);

/// whole_line_solution over boundary_conditions(count), then power_law_fit.
PowerLawFit solution_exponents(const VerblunskySequence& alphas, Complex z, const std::vector<double>& L_samples,
                               int count = 8);

}  // namespace cmvdyn
