#pragma once

#include "cmvdyn/types.hpp"

#include <Eigen/Core>

#include <istream>
#include <optional>
#include <ostream>
#include <vector>

namespace cmvdyn {

struct Atom {
    Complex z;   // point on the unit circle
    double w;    // nonnegative weight
};

/// Eigenvectors backing an atomic spectral measure: column j belongs to atom j,
/// row i to lattice index `offset + i`.
struct SpectralData {
    Index offset = 0;
    Eigen::MatrixXcd vectors;
};

/// Atomic measure on the unit circle, optionally carrying the eigenvectors it came from.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(std::vector<Atom> atoms, std::optional<SpectralData> spectral = std::nullopt);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    double total_mass() const noexcept;
    bool has_spectral_data() const noexcept { return spectral_.has_value(); }
    const SpectralData& spectral_data() const;

    /// Same atoms with every weight multiplied by `factor` (eigenvector data is dropped).
    DiscreteMeasure scaled(double factor) const;

    /// Angular resolution 2*pi/M used by the resolution guards.
    double resolution() const noexcept;

private:
    std::vector<Atom> atoms_;
    std::optional<SpectralData> spectral_;
};

/// M equal-weight atoms at exp(i(2*pi*j + phase)/M); the standard Lebesgue proxy.
DiscreteMeasure uniform_measure(std::size_t m, double phase = 0.0);

/// Angle of z in [0, 2*pi).
double angle_of(Complex z) noexcept;

/// Plain-text rows `re(z) im(z) w`; '#' starts a comment.
DiscreteMeasure read_measure(std::istream& in);
void write_measure(std::ostream& out, const DiscreteMeasure& mu);

}  // namespace cmvdyn
