#pragma once

// Finite-scale diagnostics on atomic spectral measures.

#include "cmvdyn/banded_unitary.hpp"
#include "cmvdyn/discrete_measure.hpp"
#include "cmvdyn/types.hpp"

#include <string>
#include <vector>

namespace cmvdyn {

/// sum_j w_j |((conj(z) z_j)^K - 1) / (conj(z) z_j - 1)|, with the value K at conj(z) z_j = 1.
double fejer_integral(const DiscreteMeasure& mu, Complex z, Index K);

/// (1/K) sum_{j<K} |sum_m w_m f_m z_m^{-j}|^2. `f` holds one weight per atom.
double strichartz_average(const DiscreteMeasure& mu, const std::vector<Complex>& f, Index K);

/// Largest mu(I) / |I|^alpha over closed arcs I centred at atoms and at midpoints between
/// neighbouring atoms, with |I| taken from `arc_lengths`. This is a lower estimate of the
/// best uniform alpha-Hoelder constant.
double uah_constant(const DiscreteMeasure& mu, double alpha, const std::vector<double>& arc_lengths);

/// Mass of the closed arc of angular length `length` centred at angle `center`.
double arc_mass(const DiscreteMeasure& mu, double center, double length);

/// F(z) = sum_j w_j (z_j + z) / (z_j - z) for |z| < 1.
Complex caratheodory_F(const DiscreteMeasure& mu, Complex z);

struct ProbeRow {
    double r = 0.0;
    double value = 0.0;  // (1 - r)^{1 - alpha} |F(r z0)|
    bool below_resolution = false;
};

struct AlphaDerivativeProbe {
    std::vector<ProbeRow> rows;
    /// Least-squares slope of log value against log(1 - r). Bounded values give a
    /// nonnegative slope; an atom at z0 gives -alpha.
    double slope = 0.0;
    std::vector<std::string> warnings;
};

/// Rows with 1 - r < 10 * mu.resolution() are still evaluated but flagged, and a warning
/// is attached: below that scale single atoms dominate F.
AlphaDerivativeProbe alpha_derivative_probe(const DiscreteMeasure& mu, Complex z0, double alpha,
                                            const std::vector<double>& r_grid);

/// Dyadic arcs [j pi / 2^{N-1}, (j+1) pi / 2^{N-1}), j = 0 .. 2^N - 1.
class ArcPartition {
public:
    explicit ArcPartition(int level);

    int level() const noexcept { return level_; }
    Index size() const noexcept { return Index{1} << level_; }
    double start(Index j) const noexcept;
    /// Arc containing z. Angles within 1e-9 of an arc boundary are snapped onto it so that
    /// atoms placed exactly on boundaries land in the arc they open.
    Index arc_of(Complex z) const noexcept;
    std::vector<double> masses(const DiscreteMeasure& mu) const;

private:
    int level_;
};

struct DyadicQuantities {
    std::vector<Index> low_mass_arcs;  // I_{N,alpha}: arcs with mass < 2^{-N alpha}
    double b = 0.0;                    // total mass of those arcs
    std::vector<double> arc_masses;
};

DyadicQuantities dyadic_quantities(const DiscreteMeasure& mu, int N, double alpha);

/// Constant M_{alpha,d} = (eta^3 (18 pi)^alpha / (4 pi C_d))^{1/d}, for 0 < eta < (sqrt 6 - 2)/4
/// and C_d with #{n : |n| <= m} <= C_d m^d (C_1 = 3 on the line).
double packing_radius_constant(double alpha, int d, double eta, double c_d);

/// Dyadic level with 2^{N-2} <= K pi / sqrt(eps) < 2^{N-1}.
int gsb1_level(Index K, double epsilon);

struct Gsb1Result {
    double lhs = 0.0;
    double rhs = 0.0;
    int level = 0;
};

/// lhs = (1/K) sum_{n in F} sum_{l<K} |<phi_n, U^l psi>|^2,
/// rhs = 2 eps + (8 pi / sqrt eps) sum_{n in F} sum_j |<phi_n, chi_{Gamma_j}(U) psi>|^2,
/// with spectral projections taken from the eigenvectors carried by `mu`.
Gsb1Result gsb1_check(const BandedUnitary& u, const DiscreteMeasure& mu, const State& psi,
                      const std::vector<Index>& sites, Index K, double epsilon);

}  // namespace cmvdyn
