#include "commands.hpp"

#include "operator_spec.hpp"
#include "report.hpp"

#include "cmvdyn/dynamics.hpp"
#include "cmvdyn/error.hpp"
#include "cmvdyn/fibonacci.hpp"
#include "cmvdyn/measure.hpp"
#include "cmvdyn/parallel.hpp"
#include "cmvdyn/subordinacy.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

namespace cmvdyn::cli {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string digest_of(const CLI::App& sub, const std::vector<std::string>& excluded = {"output"}) {
    return sha256_hex(canonical_config(sub, excluded));
}

std::vector<Complex> unit_grid(int m) {
    std::vector<Complex> z;
    for (int k = 0; k < m; ++k) z.push_back(std::polar(1.0, two_pi * k / m));
    return z;
}

template <class T>
void require_increasing(const std::vector<T>& v, const std::string& name, T minimum) {
    if (v.empty()) fail(ErrorKind::configuration, name + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < minimum) fail(ErrorKind::domain, name + " entries must be at least " + std::to_string(minimum));
        if (i > 0 && !(v[i] > v[i - 1])) fail(ErrorKind::domain, name + " must be strictly increasing");
    }
}

struct SimulateArgs {
    OperatorSpec op;
    Index K = 64;
    Index site = 0;
    std::vector<double> radii;
    std::vector<double> powers{1.0, 2.0};
    std::string output = "-";
};

Command simulate(CLI::App& app) {
    auto a = std::make_shared<SimulateArgs>();
    CLI::App* sub = app.add_subcommand("simulate", "Exact evolution psi(k) = U^k delta_site; P_in, P_out and moments per step");
    add_operator_options(*sub, a->op);
    sub->add_option("--K", a->K, "Number of steps")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--site", a->site, "Flat lattice index of the initial basis vector")->capture_default_str();
    sub->add_option("--radii", a->radii, "Radii R for P_in(R,k) and P_out(R,k) (default 0, 1, 2, 4, ..., <= 2K)")
        ->delimiter(',');
    sub->add_option("--powers", a->powers, "Moment powers p")->delimiter(',')->capture_default_str();
    sub->add_option("--output", a->output, "CSV path, - for stdout")->capture_default_str();
    return {sub, [a, sub] {
                a->op.validate();
                if (a->radii.empty()) {
                    a->radii.push_back(0.0);
                    for (double r = 1.0; r <= 2.0 * static_cast<double>(a->K); r *= 2.0) a->radii.push_back(r);
                }
                for (double r : a->radii)
                    if (!(r >= 0.0)) fail(ErrorKind::domain, "radii must be nonnegative");
                for (double p : a->powers)
                    if (!(p > 0.0)) fail(ErrorKind::domain, "powers must be positive");

                const auto u = build_operator(a->op, a->site);
                const auto s = transport_profile(u, State::basis(a->site), a->K, a->radii, a->powers);
                Report rep({"k", "quantity", "parameter", "value"});
                for (Index k = 0; k < s.horizon(); ++k) {
                    const auto ks = std::to_string(k);
                    const auto kk = static_cast<std::size_t>(k);
                    rep.row({ks, "total", "", num(s.total[kk])});
                    for (std::size_t r = 0; r < s.radii.size(); ++r) rep.row({ks, "p_in", num(s.radii[r]), num(s.p_in[kk][r])});
                    for (std::size_t r = 0; r < s.radii.size(); ++r) rep.row({ks, "p_out", num(s.radii[r]), num(s.p_out[kk][r])});
                    for (std::size_t p = 0; p < s.powers.size(); ++p) rep.row({ks, "moment", num(s.powers[p]), num(s.moments[kk][p])});
                }
                rep.write(a->output, digest_of(*sub));
            }};
}

struct ExponentsArgs {
    OperatorSpec op;
    Index site = 0;
    std::vector<Index> K_grid{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
    std::vector<double> powers{1.0, 2.0};
    std::string average = "cesaro";
    std::string output = "-";
};

Command exponents(CLI::App& app) {
    auto a = std::make_shared<ExponentsArgs>();
    CLI::App* sub = app.add_subcommand("exponents", "Time-averaged moments <|X|^p>(K) and the fitted transport exponents");
    add_operator_options(*sub, a->op);
    sub->add_option("--site", a->site, "Flat lattice index of the initial basis vector")->capture_default_str();
    sub->add_option("--K-grid", a->K_grid, "Increasing horizons K")->delimiter(',')->capture_default_str();
    sub->add_option("--powers", a->powers, "Moment powers p")->delimiter(',')->capture_default_str();
    sub->add_option("--average", a->average, "cesaro or exponential time average")->capture_default_str();
    sub->add_option("--output", a->output, "CSV path, - for stdout")->capture_default_str();
    return {sub, [a, sub] {
                a->op.validate();
                require_increasing<Index>(a->K_grid, "--K-grid", 2);
                if (a->K_grid.size() < 2) fail(ErrorKind::configuration, "--K-grid needs at least two horizons");
                for (double p : a->powers)
                    if (!(p > 0.0)) fail(ErrorKind::domain, "powers must be positive");
                const bool cesaro = a->average == "cesaro";
                if (!cesaro && a->average != "exponential")
                    fail(ErrorKind::configuration, "--average must be cesaro or exponential");

                Index steps = a->K_grid.back();
                if (!cesaro)
                    for (Index K : a->K_grid) steps = std::max(steps, exponential_cutoff(K));
                const auto u = build_operator(a->op, a->site);
                const auto s = transport_profile(u, State::basis(a->site), steps, {0.0}, a->powers);

                Report rep({"quantity", "p", "K", "value"});
                for (std::size_t p = 0; p < a->powers.size(); ++p) {
                    std::vector<double> f;
                    for (const auto& m : s.moments) f.push_back(m[p]);
                    std::vector<std::pair<Index, double>> curve;
                    for (Index K : a->K_grid) {
                        const double v = cesaro ? s.moment_avg(p, K) : time_average(f, K, AverageMode::exponential);
                        curve.emplace_back(K, v);
                        rep.row({"moment", num(a->powers[p]), std::to_string(K), num(v)});
                    }
                    const auto e = transport_exponent(curve, a->powers[p]);
                    const auto Kmax = std::to_string(a->K_grid.back());
                    rep.row({"beta", num(a->powers[p]), Kmax, num(e.estimate)});
                    rep.row({"beta_lower", num(a->powers[p]), Kmax, num(e.lower)});
                    rep.row({"beta_upper", num(a->powers[p]), Kmax, num(e.upper)});
                }
                rep.write(a->output, digest_of(*sub));
            }};
}

struct ParsevalArgs {
    OperatorSpec op;
    Index site = 0;
    Index n = 0;
    std::vector<Index> K{16, 64, 256};
    Index nodes = 0;
    Index radius = 0;
    std::string output = "-";
};

Command parseval(CLI::App& app) {
    auto a = std::make_shared<ParsevalArgs>();
    CLI::App* sub = app.add_subcommand("parseval-check", "Exact exponential time sum against the resolvent integral");
    add_operator_options(*sub, a->op);
    sub->add_option("--site", a->site, "Flat lattice index of the initial basis vector")->capture_default_str();
    sub->add_option("--n", a->n, "Observed flat lattice index")->capture_default_str();
    sub->add_option("--K", a->K, "Horizons")->delimiter(',')->capture_default_str();
    sub->add_option("--nodes", a->nodes, "Quadrature nodes, 0 for ceil(K ln 1e11)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--radius", a->radius, "Resolvent window radius, 0 for 16 K")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--output", a->output, "CSV path, - for stdout")->capture_default_str();
    return {sub, [a, sub] {
                a->op.validate();
                require_increasing<Index>(a->K, "--K", 1);
                const auto u = build_operator(a->op, a->site);
                const ParsevalOptions opts{a->nodes, a->radius, workers_from_env()};
                Report rep({"K", "n", "lhs", "rhs", "reldiff", "nodes", "radius"});
                for (Index K : a->K) {
                    const auto r = parseval_check(u, State::basis(a->site), a->n, K, opts);
                    rep.row({std::to_string(K), std::to_string(a->n), num(r.lhs), num(r.rhs), num(r.reldiff),
                             std::to_string(r.quad_nodes), std::to_string(r.window_radius)});
                }
                rep.write(a->output, digest_of(*sub));
            }};
}

struct SubordinacyArgs {
    OperatorSpec op;
    int z_grid = 10;
    int L_first = 6;
    int L_last = 16;
    int boundary = 8;
    std::string output = "-";
};

Command subordinacy(CLI::App& app) {
    auto a = std::make_shared<SubordinacyArgs>();
    CLI::App* sub = app.add_subcommand("subordinacy", "Power-law exponents gamma1, gamma2 of half-line solutions on a z grid");
    add_operator_options(*sub, a->op);
    sub->add_option("--z-grid", a->z_grid, "Number of points z_k = exp(2 pi i k / M)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--L-first", a->L_first, "Smallest length 2^first")->check(CLI::Range(1, 40))->capture_default_str();
    sub->add_option("--L-last", a->L_last, "Largest length 2^last")->check(CLI::Range(1, 26))->capture_default_str();
    sub->add_option("--boundary-count", a->boundary, "Boundary conditions (1, exp(2 pi i k / count))")
        ->check(CLI::Range(8, 1 << 16))
        ->capture_default_str();
    sub->add_option("--output", a->output, "CSV path, - for stdout")->capture_default_str();
    return {sub, [a, sub] {
                a->op.validate();
                if (a->L_last - a->L_first + 1 < 8)
                    fail(ErrorKind::configuration, "the L grid needs at least 8 dyadic lengths");
                const auto alphas = half_line_alphas(a->op, (Index{1} << a->L_last) + 4);
                const auto lengths = dyadic_lengths(a->L_first, a->L_last);
                const auto zs = unit_grid(a->z_grid);
                std::vector<PowerLawFit> fits(zs.size());
                parallel_for(zs.size(), workers_from_env(),
                             [&](std::size_t i) { fits[i] = solution_exponents(alphas, zs[i], lengths, a->boundary); });
                Report rep({"z_re", "z_im", "gamma1", "gamma2", "alpha"});
                for (std::size_t i = 0; i < zs.size(); ++i)
                    rep.row({num(zs[i].real()), num(zs[i].imag()), num(fits[i].gamma1), num(fits[i].gamma2),
                             num(fits[i].alpha)});
                rep.write(a->output, digest_of(*sub));
            }};
}

struct FibBoundArgs {
    double theta_a = 0.0;
    double theta_b = 0.0;
    double K = default_K;
    int z_grid = 64;
    Index trunc_N = default_truncation;
    int trace_n = 20;
    std::string output = "-";
    std::string summary;
    std::string trace_out;
};

Command fib_bound(CLI::App& app) {
    auto a = std::make_shared<FibBoundArgs>();
    CLI::App* sub = app.add_subcommand("fib-bound", "Fibonacci walk constants I, C, gamma1, gamma2, beta on a z grid");
    sub->add_option("--theta-a", a->theta_a, "Angle of symbol a (radians, inside (-pi/2, pi/2))")->capture_default_str();
    sub->add_option("--theta-b", a->theta_b, "Angle of symbol b (radians, inside (-pi/2, pi/2))")->capture_default_str();
    sub->add_option("--K", a->K, "Constant K(z) > 1 entering gamma2 = 4 log2 K")->capture_default_str();
    sub->add_option("--z-grid", a->z_grid, "Number of points z_k = exp(2 pi i k / M)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--trunc-N", a->trunc_N, "Paraorthogonal truncation size for max beta over the spectrum, 0 to skip")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--trace-n", a->trace_n, "Largest n of the trace-map table")->check(CLI::Range(1, 25))->capture_default_str();
    sub->add_option("--output", a->output, "CSV path, - for stdout")->capture_default_str();
    sub->add_option("--summary", a->summary, "JSON summary path (K, max beta, argmax)");
    sub->add_option("--trace-out", a->trace_out, "CSV path for the trace-map table on the z grid");
    return {sub, [a, sub] {
                const auto params = fibonacci_params(a->theta_a, a->theta_b, a->K);
                if (!(a->K > 1.0) || !std::isfinite(a->K)) fail(ErrorKind::domain, "--K must be finite and > 1");
                if (a->trunc_N == 1) fail(ErrorKind::domain, "--trunc-N must be 0 or at least 2");

                const auto zs = unit_grid(a->z_grid);
                const unsigned workers = workers_from_env();
                std::vector<TheoremConstants> consts(zs.size());
                parallel_for(zs.size(), workers, [&](std::size_t i) { consts[i] = theorem_constants(zs[i], params); });
                std::vector<TraceMapDiagnostic> traces;
                if (!a->trace_out.empty()) {
                    traces.resize(zs.size());
                    parallel_for(zs.size(), workers,
                                 [&](std::size_t i) { traces[i] = trace_map_diagnostic(zs[i], params, a->trace_n); });
                }
                std::optional<SpectralBeta> spectral;
                if (a->trunc_N > 0) spectral = max_beta_on_spectrum(params, a->trunc_N);

                const std::string digest = digest_of(*sub, {"output", "summary", "trace-out"});
                Report rep({"z_re", "z_im", "I", "C", "gamma1", "gamma2", "beta"});
                rep.comment("K: " + num(a->K) + " (constant K(z))");
                if (spectral) {
                    rep.comment("max-beta: " + num(spectral->max_beta) + " at z = " + num(spectral->argmax.real()) + " " +
                                num(spectral->argmax.imag()) + " over " + std::to_string(spectral->support.size()) +
                                " atoms of the size-" + std::to_string(spectral->n) + " paraorthogonal truncation");
                }
                for (std::size_t i = 0; i < zs.size(); ++i) {
                    const auto& c = consts[i];
                    rep.row({num(zs[i].real()), num(zs[i].imag()), num(c.I), num(c.C), num(c.gamma1), num(c.gamma2),
                             num(c.beta)});
                }

                std::optional<Report> trace_rep;
                if (!a->trace_out.empty()) {
                    trace_rep.emplace(std::vector<std::string>{"z_re", "z_im", "n", "x", "log10_abs_x", "fricke", "I",
                                                               "precision_bits"});
                    trace_rep->comment("K: " + num(a->K) + " (constant K(z))");
                    for (std::size_t i = 0; i < zs.size(); ++i)
                        for (const auto& r : traces[i].rows)
                            trace_rep->row({num(zs[i].real()), num(zs[i].imag()), std::to_string(r.n), num(r.x),
                                            num(r.log10_abs_x), num(r.fricke), num(traces[i].invariant_I),
                                            std::to_string(traces[i].precision_bits)});
                }
                std::string summary_text;
                if (!a->summary.empty()) {
                    nlohmann::json j;
                    j["config_digest"] = digest;
                    j["K"] = a->K;
                    j["theta_a"] = a->theta_a;
                    j["theta_b"] = a->theta_b;
                    if (spectral) {
                        j["max_beta"] = spectral->max_beta;
                        j["argmax"] = {spectral->argmax.real(), spectral->argmax.imag()};
                        j["atoms"] = spectral->support.size();
                        j["truncation"] = spectral->n;
                    }
                    if (!traces.empty()) {
                        double worst = 0.0;
                        for (const auto& t : traces) worst = std::max(worst, t.max_step);
                        j["fricke_max_step"] = worst;
                    }
                    summary_text = j.dump(2) + "\n";
                }

                rep.write(a->output, digest);
                if (trace_rep) trace_rep->write(a->trace_out, digest);
                if (!a->summary.empty()) write_file(a->summary, summary_text);
            }};
}

struct MeasureArgs {
    OperatorSpec op;
    std::string measure_file;
    Index lebesgue = 0;
    Index trunc_N = 256;
    double z_angle = 0.0;
    std::vector<Index> K_grid{16, 32, 64, 128, 256, 512, 1024};
    std::vector<double> uah_alphas{0.25, 0.5, 0.75, 1.0};
    std::vector<double> arc_lengths;
    std::vector<double> r_grid{0.5, 0.9, 0.99};
    double probe_alpha = 0.5;
    std::vector<int> levels{4, 5, 6, 7, 8, 9, 10};
    double dyadic_alpha = 0.5;
    std::string output = "-";
};

Command measure_diag(CLI::App& app) {
    auto a = std::make_shared<MeasureArgs>();
    CLI::App* sub = app.add_subcommand("measure-diag", "Fejer integrals, UaH constants, alpha-probe and dyadic masses of a measure");
    add_operator_options(*sub, a->op);
    sub->add_option("--measure-file", a->measure_file, "Atoms, one `re(z) im(z) w` line each (overrides the operator)");
    sub->add_option("--lebesgue", a->lebesgue, "Use M equal atoms at the M-th roots of unity instead")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--trunc-N", a->trunc_N, "Paraorthogonal truncation size when the measure comes from the operator")
        ->check(CLI::Range(Index{2}, Index{1} << 14))
        ->capture_default_str();
    sub->add_option("--z-angle", a->z_angle, "Evaluation point z = exp(i angle) for Fejer and the alpha-probe")
        ->capture_default_str();
    sub->add_option("--K-grid", a->K_grid, "Fejer horizons")->delimiter(',')->capture_default_str();
    sub->add_option("--uah-alphas", a->uah_alphas, "Exponents for the UaH constant")->delimiter(',')->capture_default_str();
    sub->add_option("--arc-lengths", a->arc_lengths, "Arc lengths for the UaH constant (default 2 pi 2^-j, j = 1..10)")
        ->delimiter(',');
    sub->add_option("--r-grid", a->r_grid, "Radii r < 1 for the alpha-probe")->delimiter(',')->capture_default_str();
    sub->add_option("--probe-alpha", a->probe_alpha, "Exponent alpha of the probe")->capture_default_str();
    sub->add_option("--levels", a->levels, "Dyadic levels N")->delimiter(',')->capture_default_str();
    sub->add_option("--dyadic-alpha", a->dyadic_alpha, "Exponent alpha of the low-mass arc threshold")->capture_default_str();
    sub->add_option("--output", a->output, "CSV path, - for stdout")->capture_default_str();
    return {sub, [a, sub] {
                if (a->measure_file.empty() && a->lebesgue == 0) a->op.validate();
                require_increasing<Index>(a->K_grid, "--K-grid", 1);
                require_increasing<int>(a->levels, "--levels", 1);
                for (double r : a->r_grid)
                    if (!(r >= 0.0 && r < 1.0)) fail(ErrorKind::domain, "--r-grid entries must lie in [0, 1)");
                for (double al : a->uah_alphas)
                    if (!(al > 0.0 && al <= 1.0)) fail(ErrorKind::domain, "--uah-alphas entries must lie in (0, 1]");
                if (a->arc_lengths.empty())
                    for (int j = 1; j <= 10; ++j) a->arc_lengths.push_back(two_pi * std::ldexp(1.0, -j));

                DiscreteMeasure mu;
                if (!a->measure_file.empty()) {
                    std::ifstream in(a->measure_file);
                    if (!in) fail(ErrorKind::input, "cannot open " + a->measure_file);
                    mu = read_measure(in);
                } else if (a->lebesgue > 0) {
                    mu = uniform_measure(static_cast<std::size_t>(a->lebesgue));
                } else {
                    mu = paraorthogonal_spectrum(half_line_alphas(a->op, a->trunc_N), a->trunc_N);
                }
                const Complex z = std::polar(1.0, a->z_angle);

                Report rep({"diagnostic", "x", "value"});
                rep.row({"total_mass", "0", num(mu.total_mass())});
                for (Index K : a->K_grid) rep.row({"fejer", std::to_string(K), num(fejer_integral(mu, z, K))});
                for (double al : a->uah_alphas) rep.row({"uah", num(al), num(uah_constant(mu, al, a->arc_lengths))});
                const auto probe = alpha_derivative_probe(mu, z, a->probe_alpha, a->r_grid);
                for (const auto& r : probe.rows) {
                    rep.row({"alpha_probe", num(r.r), num(r.value)});
                    rep.row({"alpha_probe_below_resolution", num(r.r), r.below_resolution ? "1" : "0"});
                }
                rep.row({"alpha_probe_slope", num(a->probe_alpha), num(probe.slope)});
                for (const auto& w : probe.warnings) rep.comment("warning: " + w);
                for (int N : a->levels) rep.row({"dyadic_b", std::to_string(N), num(dyadic_quantities(mu, N, a->dyadic_alpha).b)});
                rep.write(a->output, digest_of(*sub));
            }};
}

}  // namespace

unsigned workers_from_env() {
    const char* v = std::getenv("CMVDYN_WORKERS");
    if (v == nullptr || *v == '\0') return default_workers();
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096)
        fail(ErrorKind::configuration, std::string("CMVDYN_WORKERS must be a positive integer, got '") + v + "'");
    return static_cast<unsigned>(n);
}

std::vector<Command> register_commands(CLI::App& app) {
    return {simulate(app), exponents(app), parseval(app), subordinacy(app), fib_bound(app), measure_diag(app)};
}

}  // namespace cmvdyn::cli
