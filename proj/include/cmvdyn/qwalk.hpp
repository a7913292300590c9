#pragma once

// Coined quantum walks on the line and their gauge equivalence with extended CMV matrices.
//
// Flat index convention: |n> (x) up  ->  2n,   |n> (x) down  ->  2n + 1.

#include "cmvdyn/banded_unitary.hpp"
#include "cmvdyn/cmv.hpp"
#include "cmvdyn/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

namespace cmvdyn {

struct Coin {
    Complex c11, c12, c21, c22;

    Eigen::Matrix2cd matrix() const;
    /// max |C C^* - I| entrywise.
    double unitarity_defect() const;
};

Coin identity_coin();
/// [[cos t, -sin t], [sin t, cos t]].
Coin rotation_coin(double theta);

class CoinSequence {
public:
    using Generator = std::function<Coin(Index)>;

    CoinSequence() = default;
    explicit CoinSequence(std::map<Index, Coin> coins);
    CoinSequence(Generator generator, Window range = whole_line);

    bool contains(Index n) const noexcept;
    const Window& range() const noexcept { return range_; }
    /// Coin at site n; throws a configuration error when absent.
    Coin coin(Index n) const;

private:
    std::map<Index, Coin> table_;
    Generator generator_;
    Window range_{};
};

CoinSequence constant_coins(const Coin& c);
CoinSequence rotation_coins(double theta);
CoinSequence rotation_coins(std::function<double(Index)> theta, Window range = whole_line);
/// e^{i phi} [[a, -conj b], [b, conj a]] with (a, b) uniform on the unit sphere of C^2 and
/// phi uniform, drawn independently per site from (seed, n); the same seed gives the same coins.
CoinSequence random_coins(std::uint64_t seed, Window range = whole_line);

/// Text format: `n re11 im11 re12 im12 re21 im21 re22 im22`; '#' starts a comment.
CoinSequence read_coins(std::istream& in);
void write_coins(std::ostream& out, const CoinSequence& coins, Window sites);

/// Which of the two mutually transposed matrices represents the walk.
///
/// `displayed` has U(2n, 2n-1) = c21_n, U(2n, 2n+2) = c11_n, U(2n+1, 2n-1) = c22_n,
/// U(2n+1, 2n+2) = c12_n; this is the matrix the gauge equivalence is stated for.
/// `update_rule` is its transpose and sends |n,up> to c11_n |n+1,up> + c21_n |n-1,down>.
enum class WalkConvention { displayed, update_rule };

/// Walk unitary on a window of flat indices.
BandedUnitary build_walk_operator(const CoinSequence& coins, Window window,
                                  WalkConvention convention = WalkConvention::displayed);

/// Unimodular phases lambda_n on a range of flat indices.
struct GaugePhases {
    std::map<Index, Complex> lambdas;

    bool covers(const Window& w) const;
    Complex at(Index n) const;
};

struct GaugeResult {
    GaugePhases phases;
    VerblunskySequence alphas;
};

/// Phases lambda on flat indices [2a-1, 2b) and Verblunsky coefficients on [2a-1, 2b),
/// with alpha_odd = 0, for sites [a, b) = `sites`. An extended CMV window W of even
/// endpoints with [W.lo-2, W.hi] inside [2a-1, 2b) can then be built from the result.
GaugeResult cgmv_gauge(const CoinSequence& coins, Window sites);

/// max |conj(lambda_r) U(r,c) lambda_c - E(r,c)| over the window, interior columns only.
double verify_gauge_equivalence(const BandedUnitary& u, const GaugePhases& phases, const BandedUnitary& e);

}  // namespace cmvdyn
