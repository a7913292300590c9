#pragma once

// Operator selection shared by the subcommands: a named preset or a coefficient file.

#include "cmvdyn/banded_unitary.hpp"
#include "cmvdyn/cmv.hpp"
#include "cmvdyn/fibonacci.hpp"
#include "cmvdyn/qwalk.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

namespace cmvdyn::cli {

struct OperatorSpec {
    std::string preset = "free-cmv";
    std::string verblunsky_file;
    std::string coin_file;
    double alpha_re = 0.0;
    double alpha_im = 0.0;
    double theta = 0.0;
    double theta_a = 0.0;
    double theta_b = 0.0;
    std::uint64_t seed = 1;
    std::string convention = "displayed";

    bool is_walk() const;
    /// Checks the preset name, the coefficient ranges and the file/preset exclusivity.
    void validate() const;
};

void add_operator_options(CLI::App& app, OperatorSpec& spec);

/// Extended CMV matrix or walk unitary around flat index `site`; the window regrows on demand.
BandedUnitary build_operator(const OperatorSpec& spec, Index site);

/// Half-line coefficients alpha_0 .. alpha_{count-1}; walks go through the CGMV gauge.
VerblunskySequence half_line_alphas(const OperatorSpec& spec, Index count);

}  // namespace cmvdyn::cli
