#pragma once

// Exact time evolution psi(k) = U^k psi and the transport quantities built on it.

#include "cmvdyn/banded_unitary.hpp"
#include "cmvdyn/types.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace cmvdyn {

inline constexpr std::size_t default_memory_budget = std::size_t{2} << 30;  // bytes

struct EvolutionRecord {
    std::vector<State> states;  // psi(0), ..., psi(K-1), each trimmed to its support
    std::vector<double> norms;

    Index horizon() const noexcept { return static_cast<Index>(states.size()); }
};

/// Worst-case storage for K states starting from a support of `initial_width` sites.
std::size_t evolution_bytes(Index initial_width, Index K) noexcept;

/// Exact evolution for k = 0..K-1. The operator window is regrown once to cover every
/// reachable site, so no truncation occurs when U has a column source. Throws ResourceError
/// (with the largest admissible K) when the record would not fit in `memory_budget`.
EvolutionRecord evolve(const BandedUnitary& u, const State& psi0, Index K,
                       std::size_t memory_budget = default_memory_budget);

/// Same evolution without storing the states: visit(k, psi(k)) for k = 0..K-1.
void stream_evolution(const BandedUnitary& u, const State& psi0, Index K,
                      const std::function<void(Index, const State&)>& visit);

/// Nonnegative values on a lattice range: values[i] belongs to site offset + i.
struct Profile {
    Index offset = 0;
    std::vector<double> values;

    double at(Index n) const noexcept {
        if (n < offset || n >= offset + static_cast<Index>(values.size())) return 0.0;
        return values[static_cast<std::size_t>(n - offset)];
    }
    double sum() const noexcept;
};

/// a(n,k) = |<phi_n, psi(k)>|^2.
Profile site_probabilities(const State& psi);
/// Cesaro average over k < K of a(n,k).
Profile cesaro_profile(const EvolutionRecord& rec, Index K);

/// Per-step transport statistics with running (Cesaro) averages.
///
/// |n| is the absolute value of the lattice index. Moments use the (|n|^p + 1) weight.
struct TransportSeries {
    std::vector<double> radii;
    std::vector<double> powers;
    std::vector<double> total;                 // sum_n a(n,k)
    std::vector<std::vector<double>> p_in;     // [k][r]
    std::vector<std::vector<double>> p_out;    // [k][r]
    std::vector<std::vector<double>> moments;  // [k][p]: |X|^p(k)
    Profile cesaro;                            // a~(n, horizon)

    Index horizon() const noexcept { return static_cast<Index>(total.size()); }
    double p_in_avg(std::size_t r, Index K) const;
    double p_out_avg(std::size_t r, Index K) const;
    double moment_avg(std::size_t p, Index K) const;
};

TransportSeries transport_profile(const EvolutionRecord& rec, const std::vector<double>& radii,
                                  const std::vector<double>& powers);
/// Streaming variant: evolves and accumulates without keeping states (cesaro profile included).
TransportSeries transport_profile(const BandedUnitary& u, const State& psi0, Index K,
                                  const std::vector<double>& radii, const std::vector<double>& powers);

enum class AverageMode { cesaro, exponential };

/// Smallest k_c with (2/K) sum_{k >= k_c} e^{-2k/K} < tol.
Index exponential_cutoff(Index K, double tol = 1e-14);

/// Cesaro: (1/K) sum_{j<K} f(j). Exponential: (2/K) sum_{k<k_c} e^{-2k/K} f(k), k_c = exponential_cutoff(K).
double time_average(const std::vector<double>& f, Index K, AverageMode mode);

struct ExponentEstimate {
    double estimate = 0.0;  // least-squares slope / p
    double lower = 0.0;     // smallest two-point slope / p
    double upper = 0.0;     // largest two-point slope / p
};

/// Fits log <|X|^p>(K) against log K. `curve` holds (K, value) pairs with K increasing.
/// All three numbers are clamped to [0, 1]: a banded unitary moves a state by a bounded
/// number of sites per step, so the moments cannot grow faster than K^p.
ExponentEstimate transport_exponent(const std::vector<std::pair<Index, double>>& curve, double p);

struct ParsevalResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double reldiff = 0.0;
    Index quad_nodes = 0;
    Index window_radius = 0;
};

struct ParsevalOptions {
    Index quad_nodes = 0;       // 0: automatic, ceil(K ln 1e11)
    Index window_radius = 0;    // 0: automatic, 16 K sites
    unsigned workers = 0;       // 0: hardware concurrency
};

/// Node count used when ParsevalOptions::quad_nodes is 0.
Index default_quad_nodes(Index K);

/// Compares sum_k e^{-2k/K} a(n,k) (exact evolution) with
/// e^{2/K} \int |<phi_n, (U - e^{1/K + i theta})^{-1} psi>|^2 dtheta / 2pi (trapezoid rule,
/// banded solves on a window around supp psi).
ParsevalResult parseval_check(const BandedUnitary& u, const State& psi, Index n, Index K,
                              const ParsevalOptions& options = {});

struct BoundRow {
    double radius = 0.0;
    Index K = 0;
    double value = 0.0;  // observed time average
    double bound = 0.0;  // normalising scale
    double ratio = 0.0;  // value / bound
};

struct BoundTable {
    std::vector<BoundRow> rows;
    double median_ratio = 0.0;
    double max_ratio = 0.0;
    bool consistent = true;  // max ratio <= 10 x median ratio
};

/// Ratios P~_in(N,K) K^alpha / N (times 1/log K at alpha = 1) over the grid.
BoundTable pin_bound_check(const TransportSeries& series, double alpha, const std::vector<double>& n_grid,
                           const std::vector<Index>& k_grid);
/// Same table for an arbitrary P~_in(N, K), e.g. a synthetic profile.
BoundTable pin_bound_check(const std::function<double(double, Index)>& p_in_tilde, double alpha,
                           const std::vector<double>& n_grid, const std::vector<Index>& k_grid);

/// Trace norm of the projection onto {|n| <= N}: (2 floor(N) + 1)^{1/p}.
double projection_trace_norm(double N, double p);

/// (1/K) sum_k <psi(k), P_N psi(k)> against ||P_N||_p K^{-alpha/p}, or ||P_N||_p (log K / K)^{1/p}
/// at alpha = 1. The radius must be one of series.radii.
BoundTable rage_check(const TransportSeries& series, double N, double p, double alpha,
                      const std::vector<Index>& k_grid);

}  // namespace cmvdyn
