#include "cmvdyn/discrete_measure.hpp"

#include "cmvdyn/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace cmvdyn {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, std::optional<SpectralData> spectral)
    : atoms_(std::move(atoms)), spectral_(std::move(spectral)) {
    for (const auto& a : atoms_) {
        if (std::abs(std::abs(a.z) - 1.0) > 1e-12) {
            std::ostringstream os;
            os << "atom " << a.z << " is not on the unit circle";
            fail(ErrorKind::domain, os.str());
        }
        if (!(a.w >= 0.0)) fail(ErrorKind::domain, "atom weights must be nonnegative");
    }
    if (spectral_ && spectral_->vectors.cols() != static_cast<Eigen::Index>(atoms_.size())) {
        fail(ErrorKind::alignment, "eigenvector count does not match atom count");
    }
}

double DiscreteMeasure::total_mass() const noexcept {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.w;
    return s;
}

const SpectralData& DiscreteMeasure::spectral_data() const {
    if (!spectral_) fail(ErrorKind::capability, "measure carries no eigenvector data");
    return *spectral_;
}

DiscreteMeasure DiscreteMeasure::scaled(double factor) const {
    auto atoms = atoms_;
    for (auto& a : atoms) a.w *= factor;
    return DiscreteMeasure(std::move(atoms));
}

double DiscreteMeasure::resolution() const noexcept {
    return 2.0 * std::numbers::pi / static_cast<double>(atoms_.empty() ? 1 : atoms_.size());
}

DiscreteMeasure uniform_measure(std::size_t m, double phase) {
    std::vector<Atom> atoms;
    atoms.reserve(m);
    const double w = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double theta = (2.0 * std::numbers::pi * static_cast<double>(j) + phase) / static_cast<double>(m);
        atoms.push_back({std::polar(1.0, theta), w});
    }
    return DiscreteMeasure(std::move(atoms));
}

double angle_of(Complex z) noexcept {
    double t = std::arg(z);
    if (t < 0.0) t += 2.0 * std::numbers::pi;
    if (t >= 2.0 * std::numbers::pi) t -= 2.0 * std::numbers::pi;
    return t;
}

DiscreteMeasure read_measure(std::istream& in) {
    std::vector<Atom> atoms;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double re, im, w;
        if (!(ls >> re)) continue;
        if (!(ls >> im >> w)) fail(ErrorKind::input, "line " + std::to_string(line_no) + ": expected `re im w`");
        atoms.push_back({{re, im}, w});
    }
    return DiscreteMeasure(std::move(atoms));
}

void write_measure(std::ostream& out, const DiscreteMeasure& mu) {
    const auto old = out.precision(17);
    for (const auto& a : mu.atoms()) out << a.z.real() << ' ' << a.z.imag() << ' ' << a.w << '\n';
    out.precision(old);
}

}  // namespace cmvdyn
