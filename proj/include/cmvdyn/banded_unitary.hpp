#pragma once

#include "cmvdyn/types.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace cmvdyn {

/// Unitary operator on a lattice window, stored by its five diagonals (offsets -2..+2).
///
/// Entries are kept column-wise: column c holds rows c-2 .. c+2, with rows outside
/// the window set to zero. The window is a finite section of an operator living on
/// `domain()`; when a column source is attached the window can be regrown.
class BandedUnitary {
public:
    static constexpr int bandwidth = 2;
    using Column = std::array<Complex, 2 * bandwidth + 1>;
    /// Produces column `col`; rows outside `rows` are discarded, so a source may skip them.
    using ColumnSource = std::function<Column(Index col, const Window& rows)>;

    BandedUnitary() = default;

    /// Materialises `window` from `source`; the source may throw for columns it cannot produce.
    static BandedUnitary from_source(Window window, Window domain, ColumnSource source);

    /// Fixed matrix with no source; `domain` gives the indices on which the operator is closed.
    static BandedUnitary from_columns(Window window, Window domain, std::vector<Column> columns);

    Window window() const noexcept { return window_; }
    Window domain() const noexcept { return domain_; }
    bool extensible() const noexcept { return static_cast<bool>(source_); }

    /// Columns whose full image lies inside the window.
    Window interior() const noexcept;

    Complex operator()(Index row, Index col) const noexcept;
    const Column& column(Index col) const { return columns_.at(static_cast<std::size_t>(col - window_.lo)); }

    /// Same operator on a different window; requires a column source.
    BandedUnitary with_window(Window window) const;

    /// Transpose on the same window (the source, when present, is transposed too).
    BandedUnitary transposed() const;

    Eigen::MatrixXcd dense() const;

private:
    Window window_{};
    Window domain_{};
    std::vector<Column> columns_;
    std::shared_ptr<const ColumnSource> source_;
};

enum class Extension { none, automatic };

/// Returns U v. The support of v must lie in U.interior() unless `extension` is automatic,
/// in which case the window is regrown from the column source first.
State apply(const BandedUnitary& op, const State& v, Extension extension = Extension::none);

}  // namespace cmvdyn
