#pragma once

// CMV and extended CMV matrices built from Verblunsky coefficients.

#include "cmvdyn/banded_unitary.hpp"
#include "cmvdyn/discrete_measure.hpp"
#include "cmvdyn/types.hpp"

#include <functional>
#include <istream>
#include <map>
#include <ostream>

namespace cmvdyn {

/// Verblunsky coefficients alpha_n in the open unit disk, indexed by n.
///
/// Either an explicit table or a generator defined on an index range; every value
/// handed out satisfies |alpha| < 1.
class VerblunskySequence {
public:
    using Generator = std::function<Complex(Index)>;

    VerblunskySequence() = default;
    VerblunskySequence(std::map<Index, Complex> coefficients, bool half_line);
    VerblunskySequence(Generator generator, bool half_line, Window range = whole_line);

    bool half_line() const noexcept { return half_line_; }
    bool contains(Index n) const noexcept;
    Complex alpha(Index n) const;
    double rho(Index n) const;

    /// Restriction to indices n >= 0, flagged half-line.
    VerblunskySequence restricted_to_half_line() const;

private:
    std::map<Index, Complex> table_;
    Generator generator_;
    Window range_{};
    bool half_line_ = true;
};

/// alpha_n = value for every admissible n.
VerblunskySequence constant_verblunsky(Complex value, bool half_line);

/// Text format: one line per index, `n re(alpha) im(alpha)`; '#' starts a comment.
VerblunskySequence read_verblunsky(std::istream& in, bool half_line);
void write_verblunsky(std::ostream& out, const VerblunskySequence& alphas, Window range);

/// Top-left size x size window of the half-line CMV matrix.
BandedUnitary build_half_line_cmv(const VerblunskySequence& alphas, Index size);

/// Window of the extended CMV matrix; the (0,0) entry is -conj(alpha_0) alpha_{-1}.
/// The window must have even endpoints and length >= 6.
BandedUnitary build_extended_cmv(const VerblunskySequence& alphas, Window window);

/// N x N unitary obtained by replacing alpha_{N-1} with a unimodular boundary phase.
BandedUnitary paraorthogonal_truncation(const VerblunskySequence& alphas, Index n, Complex boundary_phase = 1.0);

/// Atomic spectral measure of delta_0 for the paraorthogonal truncation, with eigenvectors.
DiscreteMeasure paraorthogonal_spectrum(const VerblunskySequence& alphas, Index n, Complex boundary_phase = 1.0);

}  // namespace cmvdyn
