#include "cmvdyn/cmv.hpp"

#include "cmvdyn/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <string>

namespace cmvdyn {

namespace {

void check_in_disk(Index n, Complex a) {
    if (!(std::abs(a) < 1.0)) {
        std::ostringstream os;
        os << "Verblunsky coefficient alpha_" << n << " = " << a << " is not in the open unit disk";
        fail(ErrorKind::domain, os.str());
    }
}

bool is_odd(Index n) noexcept { return (n & 1) != 0; }

struct Coefficient {
    Complex alpha;
    double rho;
};

using CoefficientFn = std::function<Coefficient(Index)>;

/// Column c of L*M, where L carries the 2x2 blocks Theta_{2j} on (2j, 2j+1) and M carries
/// Theta_{2j+1} on (2j+1, 2j+2), Theta_k = [[conj(a_k), rho_k], [rho_k, -a_k]].
/// Intermediate indices outside `domain` are skipped.
BandedUnitary::Column cmv_column(const CoefficientFn& coef, const Window& domain, Index c) {
    struct Term {
        Index row;
        Complex value;
    };
    Term m_terms[2];
    if (is_odd(c)) {
        const auto k = coef(c);
        m_terms[0] = {c, std::conj(k.alpha)};
        m_terms[1] = {c + 1, k.rho};
    } else {
        const auto k = coef(c - 1);
        m_terms[0] = {c - 1, k.rho};
        m_terms[1] = {c, -k.alpha};
    }
    BandedUnitary::Column col{};
    for (const auto& mt : m_terms) {
        const Index m = mt.row;
        if (!domain.contains(m) || mt.value == Complex{0.0, 0.0}) continue;
        Term l_terms[2];
        if (is_odd(m)) {
            const auto k = coef(m - 1);
            l_terms[0] = {m - 1, k.rho};
            l_terms[1] = {m, -k.alpha};
        } else {
            const auto k = coef(m);
            l_terms[0] = {m, std::conj(k.alpha)};
            l_terms[1] = {m + 1, k.rho};
        }
        for (const auto& lt : l_terms) {
            if (!domain.contains(lt.row)) continue;
            col[static_cast<std::size_t>(lt.row - c + BandedUnitary::bandwidth)] += lt.value * mt.value;
        }
    }
    return col;
}

std::string range_string(Index lo, Index hi) {
    return "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
}

void require_coefficients(const VerblunskySequence& alphas, Index lo, Index hi) {
    for (Index n = lo; n <= hi; ++n) {
        if (!alphas.contains(n)) {
            fail(ErrorKind::configuration,
                 "missing Verblunsky coefficient alpha_" + std::to_string(n) + " (need " + range_string(lo, hi) + ")");
        }
    }
}

}  // namespace

VerblunskySequence::VerblunskySequence(std::map<Index, Complex> coefficients, bool half_line)
    : table_(std::move(coefficients)), half_line_(half_line) {
    for (const auto& [n, a] : table_) {
        if (half_line_ && n < 0) {
            fail(ErrorKind::configuration, "half-line sequence has negative index " + std::to_string(n));
        }
        check_in_disk(n, a);
    }
}

VerblunskySequence::VerblunskySequence(Generator generator, bool half_line, Window range)
    : generator_(std::move(generator)), range_(half_line ? intersect(range, cmvdyn::half_line) : range),
      half_line_(half_line) {}

bool VerblunskySequence::contains(Index n) const noexcept {
    if (generator_) return range_.contains(n);
    return table_.count(n) != 0;
}

Complex VerblunskySequence::alpha(Index n) const {
    if (generator_) {
        if (!range_.contains(n)) {
            fail(ErrorKind::configuration, "missing Verblunsky coefficient alpha_" + std::to_string(n));
        }
        const Complex a = generator_(n);
        check_in_disk(n, a);
        return a;
    }
    auto it = table_.find(n);
    if (it == table_.end()) {
        fail(ErrorKind::configuration, "missing Verblunsky coefficient alpha_" + std::to_string(n));
    }
    return it->second;
}

double VerblunskySequence::rho(Index n) const { return std::sqrt(1.0 - std::norm(alpha(n))); }

VerblunskySequence VerblunskySequence::restricted_to_half_line() const {
    if (generator_) return VerblunskySequence(generator_, true, intersect(range_, cmvdyn::half_line));
    std::map<Index, Complex> t(table_.lower_bound(0), table_.end());
    return VerblunskySequence(std::move(t), true);
}

VerblunskySequence constant_verblunsky(Complex value, bool half_line) {
    check_in_disk(0, value);
    return VerblunskySequence([value](Index) { return value; }, half_line);
}

VerblunskySequence read_verblunsky(std::istream& in, bool half_line) {
    std::map<Index, Complex> table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Index n;
        double re, im;
        if (!(ls >> n)) continue;
        if (!(ls >> re >> im)) {
            fail(ErrorKind::input, "line " + std::to_string(line_no) + ": expected `n re im`");
        }
        if (!table.emplace(n, Complex{re, im}).second) {
            fail(ErrorKind::input, "line " + std::to_string(line_no) + ": duplicate index " + std::to_string(n));
        }
    }
    return VerblunskySequence(std::move(table), half_line);
}

void write_verblunsky(std::ostream& out, const VerblunskySequence& alphas, Window range) {
    const auto old = out.precision(17);
    for (Index n = range.lo; n < range.hi; ++n) {
        const Complex a = alphas.alpha(n);
        out << n << ' ' << a.real() << ' ' << a.imag() << '\n';
    }
    out.precision(old);
}

BandedUnitary build_half_line_cmv(const VerblunskySequence& alphas, Index size) {
    if (!alphas.half_line()) fail(ErrorKind::configuration, "build_half_line_cmv needs a half-line sequence");
    if (size < 2) fail(ErrorKind::input, "half-line CMV window needs size >= 2");
    require_coefficients(alphas, 0, size);
    // alpha_{-1} = -1 (rho_{-1} = 0) turns the extended pattern into the half-line one.
    CoefficientFn coef = [alphas](Index n) -> Coefficient {
        if (n == -1) return {-1.0, 0.0};
        return {alphas.alpha(n), alphas.rho(n)};
    };
    const Window domain = cmvdyn::half_line;
    return BandedUnitary::from_source({0, size}, domain,
                                      [coef, domain](Index c, const Window&) { return cmv_column(coef, domain, c); });
}

BandedUnitary build_extended_cmv(const VerblunskySequence& alphas, Window window) {
    if (window.size() < 6) fail(ErrorKind::alignment, "extended CMV window needs length >= 6");
    if (is_odd(window.lo) || is_odd(window.hi)) {
        fail(ErrorKind::alignment, "extended CMV window must have even endpoints, got " +
                                       range_string(window.lo, window.hi - 1));
    }
    if (alphas.half_line()) fail(ErrorKind::configuration, "build_extended_cmv needs a two-sided sequence");
    require_coefficients(alphas, window.lo - 2, window.hi);
    CoefficientFn coef = [alphas](Index n) -> Coefficient { return {alphas.alpha(n), alphas.rho(n)}; };
    const Window domain = whole_line;
    return BandedUnitary::from_source(window, domain,
                                      [coef, domain](Index c, const Window&) { return cmv_column(coef, domain, c); });
}

BandedUnitary paraorthogonal_truncation(const VerblunskySequence& alphas, Index n, Complex boundary_phase) {
    if (n < 1) fail(ErrorKind::input, "paraorthogonal truncation needs N >= 1");
    if (std::abs(std::abs(boundary_phase) - 1.0) > 1e-12) {
        fail(ErrorKind::domain, "boundary phase must be unimodular");
    }
    if (n >= 2) require_coefficients(alphas, 0, n - 2);
    const Complex beta = boundary_phase / std::abs(boundary_phase);
    CoefficientFn coef = [alphas, n, beta](Index k) -> Coefficient {
        if (k == -1) return {-1.0, 0.0};
        if (k == n - 1) return {beta, 0.0};
        if (k >= n) return {0.0, 1.0};  // never reached: decoupled by rho_{N-1} = 0
        return {alphas.alpha(k), alphas.rho(k)};
    };
    const Window domain{0, n};
    std::vector<BandedUnitary::Column> cols;
    cols.reserve(static_cast<std::size_t>(n));
    for (Index c = 0; c < n; ++c) cols.push_back(cmv_column(coef, domain, c));
    return BandedUnitary::from_columns(domain, domain, std::move(cols));
}

DiscreteMeasure paraorthogonal_spectrum(const VerblunskySequence& alphas, Index n, Complex boundary_phase) {
    const BandedUnitary op = paraorthogonal_truncation(alphas, n, boundary_phase);
    const Eigen::MatrixXcd dense = op.dense();

    // (U + U*)/2 shares the eigenvectors of U and has the real parts as eigenvalues. Eigenvalues
    // of U with (nearly) equal real parts show up as a cluster; U restricted to the cluster's
    // invariant subspace is then diagonalised directly.
    const Eigen::MatrixXcd herm = 0.5 * (dense + dense.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> sa(herm);
    if (sa.info() != Eigen::Success) fail(ErrorKind::numerical, "Hermitian eigensolver did not converge");
    const Eigen::VectorXd& re = sa.eigenvalues();
    const Eigen::MatrixXcd& basis = sa.eigenvectors();

    constexpr double cluster_gap = 1e-4;
    Eigen::MatrixXcd vectors(n, n);
    Eigen::VectorXcd values(n);
    for (Eigen::Index first = 0; first < n;) {
        Eigen::Index last = first + 1;
        while (last < n && re(last) - re(last - 1) < cluster_gap) ++last;
        const Eigen::Index size = last - first;
        const Eigen::MatrixXcd q = basis.middleCols(first, size);
        const Eigen::MatrixXcd small = q.adjoint() * dense * q;
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(small);
        if (schur.info() != Eigen::Success) fail(ErrorKind::numerical, "Schur step on an eigenvalue cluster failed");
        vectors.middleCols(first, size) = q * schur.matrixU();
        values.segment(first, size) = schur.matrixT().diagonal();
        first = last;
    }

    // Residual of the eigen-equation; a normal matrix leaves nothing off the diagonal.
    const double residual = (dense * vectors - vectors * values.asDiagonal()).cwiseAbs().maxCoeff();
    if (residual > 1e-10) {
        std::ostringstream os;
        os << "eigen-decomposition residual " << residual << " of the " << n << "x" << n << " truncation";
        fail(ErrorKind::numerical, os.str());
    }
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        const Complex z = values(j);
        atoms.push_back({z / std::abs(z), std::norm(vectors(0, j))});
    }
    return DiscreteMeasure(std::move(atoms), SpectralData{0, std::move(vectors)});
}

}  // namespace cmvdyn
