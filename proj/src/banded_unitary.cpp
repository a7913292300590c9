#include "cmvdyn/banded_unitary.hpp"

#include "cmvdyn/error.hpp"

#include <algorithm>
#include <string>

namespace cmvdyn {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::domain: return "domain";
        case ErrorKind::alignment: return "alignment";
        case ErrorKind::truncation: return "truncation";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::resource: return "resource";
        case ErrorKind::input: return "input";
        case ErrorKind::capability: return "capability";
        case ErrorKind::gauge_degenerate: return "gauge_degenerate";
    }
    return "unknown";
}

double State::norm() const noexcept { return std::sqrt(norm_squared()); }

void State::trim() {
    const Complex zero{0.0, 0.0};
    auto first_nz = std::find_if(amplitudes.begin(), amplitudes.end(), [&](const Complex& a) { return a != zero; });
    if (first_nz == amplitudes.end()) {
        amplitudes.clear();
        return;
    }
    auto last_nz = std::find_if(amplitudes.rbegin(), amplitudes.rend(), [&](const Complex& a) { return a != zero; });
    const auto head = first_nz - amplitudes.begin();
    amplitudes.erase(last_nz.base(), amplitudes.end());
    amplitudes.erase(amplitudes.begin(), amplitudes.begin() + head);
    offset += head;
}

Complex inner(const State& a, const State& b) noexcept {
    const Index lo = std::max(a.first(), b.first());
    const Index hi = std::min(a.end(), b.end());
    Complex s{0.0, 0.0};
    for (Index n = lo; n < hi; ++n) s += std::conj(a.at(n)) * b.at(n);
    return s;
}

namespace {

void crop_to_window(BandedUnitary::Column& col, Index c, const Window& window) {
    for (int d = 0; d < 2 * BandedUnitary::bandwidth + 1; ++d) {
        if (!window.contains(c + d - BandedUnitary::bandwidth)) col[static_cast<std::size_t>(d)] = 0.0;
    }
}

std::string window_string(const Window& w) {
    return "[" + std::to_string(w.lo) + ", " + std::to_string(w.hi) + ")";
}

}  // namespace

BandedUnitary BandedUnitary::from_source(Window window, Window domain, ColumnSource source) {
    if (!domain.contains(window)) {
        fail(ErrorKind::alignment, "window " + window_string(window) + " leaves the operator domain");
    }
    BandedUnitary op;
    op.window_ = window;
    op.domain_ = domain;
    op.columns_.reserve(static_cast<std::size_t>(window.size()));
    for (Index c = window.lo; c < window.hi; ++c) {
        Column col = source(c, window);
        crop_to_window(col, c, window);
        op.columns_.push_back(col);
    }
    op.source_ = std::make_shared<const ColumnSource>(std::move(source));
    return op;
}

BandedUnitary BandedUnitary::from_columns(Window window, Window domain, std::vector<Column> columns) {
    if (static_cast<Index>(columns.size()) != window.size()) {
        fail(ErrorKind::alignment, "column count does not match window " + window_string(window));
    }
    if (!domain.contains(window)) {
        fail(ErrorKind::alignment, "window " + window_string(window) + " leaves the operator domain");
    }
    BandedUnitary op;
    op.window_ = window;
    op.domain_ = domain;
    op.columns_ = std::move(columns);
    for (Index c = window.lo; c < window.hi; ++c) {
        crop_to_window(op.columns_[static_cast<std::size_t>(c - window.lo)], c, window);
    }
    return op;
}

Window BandedUnitary::interior() const noexcept {
    const Index lo = window_.lo <= domain_.lo ? window_.lo : window_.lo + bandwidth;
    const Index hi = window_.hi >= domain_.hi ? window_.hi : window_.hi - bandwidth;
    return {lo, std::max(lo, hi)};
}

Complex BandedUnitary::operator()(Index row, Index col) const noexcept {
    if (!window_.contains(row) || !window_.contains(col)) return {0.0, 0.0};
    const Index d = row - col;
    if (d < -bandwidth || d > bandwidth) return {0.0, 0.0};
    return columns_[static_cast<std::size_t>(col - window_.lo)][static_cast<std::size_t>(d + bandwidth)];
}

BandedUnitary BandedUnitary::with_window(Window window) const {
    if (!source_) {
        fail(ErrorKind::capability, "operator has no column source; cannot regrow window");
    }
    return from_source(intersect(window, domain_), domain_, *source_);
}

BandedUnitary BandedUnitary::transposed() const {
    if (source_) {
        auto src = source_;
        const Window domain = domain_;
        ColumnSource t = [src, domain](Index c, const Window& rows) {
            Column out{};
            for (int d = 0; d < 2 * bandwidth + 1; ++d) {
                const Index r = c + d - bandwidth;
                if (!domain.contains(r) || !rows.contains(r)) continue;
                const Column orig = (*src)(r, Window{c, c + 1});
                out[static_cast<std::size_t>(d)] = orig[static_cast<std::size_t>(c - r + bandwidth)];
            }
            return out;
        };
        return from_source(window_, domain_, std::move(t));
    }
    std::vector<Column> cols(columns_.size());
    for (Index c = window_.lo; c < window_.hi; ++c) {
        auto& out = cols[static_cast<std::size_t>(c - window_.lo)];
        for (int d = 0; d < 2 * bandwidth + 1; ++d) out[static_cast<std::size_t>(d)] = (*this)(c, c + d - bandwidth);
    }
    return from_columns(window_, domain_, std::move(cols));
}

Eigen::MatrixXcd BandedUnitary::dense() const {
    const Index n = window_.size();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Index c = window_.lo; c < window_.hi; ++c) {
        for (Index r = std::max(window_.lo, c - bandwidth); r < std::min(window_.hi, c + bandwidth + 1); ++r) {
            m(r - window_.lo, c - window_.lo) = (*this)(r, c);
        }
    }
    return m;
}

State apply(const BandedUnitary& op, const State& v, Extension extension) {
    if (v.empty()) return State{v.offset, {}};
    const Window support = v.support();
    const BandedUnitary* active = &op;
    BandedUnitary grown;
    if (!op.interior().contains(support)) {
        if (extension == Extension::none || !op.extensible()) {
            fail(ErrorKind::truncation, "state support " + window_string(support) + " touches the edge of window " +
                                            window_string(op.window()));
        }
        const Index margin = 2 * BandedUnitary::bandwidth;
        grown = op.with_window({std::min(op.window().lo, support.lo - margin),
                                std::max(op.window().hi, support.hi + margin)});
        if (!grown.interior().contains(support)) {
            fail(ErrorKind::truncation, "state support " + window_string(support) + " leaves the operator domain");
        }
        active = &grown;
    }
    const Window out_window =
        intersect({support.lo - BandedUnitary::bandwidth, support.hi + BandedUnitary::bandwidth}, active->window());
    State out{out_window.lo, std::vector<Complex>(static_cast<std::size_t>(out_window.size()))};
    for (Index c = support.lo; c < support.hi; ++c) {
        const Complex x = v.at(c);
        if (x == Complex{0.0, 0.0}) continue;
        const auto& col = active->column(c);
        for (int d = 0; d < 2 * BandedUnitary::bandwidth + 1; ++d) {
            const Index r = c + d - BandedUnitary::bandwidth;
            if (!out_window.contains(r)) continue;
            out.amplitudes[static_cast<std::size_t>(r - out_window.lo)] += col[static_cast<std::size_t>(d)] * x;
        }
    }
    out.trim();
    return out;
}

}  // namespace cmvdyn
