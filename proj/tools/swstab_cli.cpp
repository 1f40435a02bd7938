// Command-line front end: system ingestion from JSON spec files, one
// subcommand per library capability, seeded reproducible output. Scalar
// results go to stdout as JSON; grids and sweeps are CSV with '#' metadata
// lines carrying the seed and parameters.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swstab/swstab.hpp"

namespace {

using nlohmann::ordered_json;
using namespace swstab;

constexpr int kExitOk = 0;
constexpr int kExitPrecondition = 2;
constexpr int kExitUsage = 64;
constexpr int kExitNoInput = 66;
constexpr int kExitInternal = 70;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

ordered_json mat_json(const Mat2& m) {
    return ordered_json::array({ordered_json::array({m.a11, m.a12}),
                                ordered_json::array({m.a21, m.a22})});
}

struct CsvTable {
    std::vector<std::string> meta; ///< without the leading "# "
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void write(std::ostream& os) const {
        for (const auto& m : meta) os << "# " << m << "\n";
        for (std::size_t i = 0; i < header.size(); ++i)
            os << header[i] << (i + 1 < header.size() ? "," : "\n");
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                os << fmt(row[i]) << (i + 1 < row.size() ? "," : "\n");
        }
    }
};

void emit_csv(const CsvTable& table, const std::string& out_path) {
    if (out_path.empty()) {
        table.write(std::cout);
        return;
    }
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write output file: " + out_path);
    table.write(f);
}

struct GlobalOpts {
    std::string spec_path;
    std::string out_path;
    std::uint64_t seed = 0;
    int replicas = 32;
    double horizon = 1e5;
    std::int64_t steps = 100000;
    std::string beta_grid;
};

SystemSpec require_spec(const GlobalOpts& g) {
    if (g.spec_path.empty()) throw SpecIOError("missing --spec FILE");
    return load_system_spec(g.spec_path);
}

const ExactModel& require_family(const SystemSpec& spec, const char* cmd) {
    if (!spec.model)
        throw std::domain_error(std::string(cmd) + " requires a family spec "
                                                   "(\"rotations\" or \"jordan\")");
    return *spec.model;
}

std::vector<double> parse_beta_grid(const std::string& text) {
    // lo:hi:n or lo:hi:n:log
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3 && parts.size() != 4)
        throw std::domain_error("--beta-grid expects lo:hi:n or lo:hi:n:log");
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const int n = std::stoi(parts[2]);
    const bool logspace = parts.size() == 4 && parts[3] == "log";
    if (parts.size() == 4 && !logspace)
        throw std::domain_error("--beta-grid: fourth field must be 'log'");
    if (n < 2 || !(lo > 0.0) || !(lo < hi))
        throw std::domain_error("--beta-grid: need 0 < lo < hi and n >= 2");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        grid.push_back(logspace ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo));
    }
    return grid;
}

double default_theta0(const SystemSpec& spec) {
    try {
        return averaged_profile(spec.A0, spec.A1, spec.lam).theta_plus + 0.1;
    } catch (const std::exception&) {
        return 0.1;
    }
}

ordered_json estimate_json(const LyapunovEstimate& est) {
    ordered_json j;
    j["value"] = est.value;
    j["std_error"] = est.std_error;
    j["horizon"] = est.horizon;
    j["replicas"] = est.replicas;
    j["seed"] = est.seed;
    if (est.single_replica) j["std_error_unavailable"] = true;
    return j;
}

int cmd_check(const GlobalOpts& g) {
    const SystemSpec spec = require_spec(g);
    const CriterionReport rep = hyperbolicity_criterion(spec.A0, spec.A1);
    ordered_json j;
    j["holds"] = rep.holds;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["boundary"] = rep.boundary;
    if (rep.lambda_window)
        j["lambda_window"] =
            ordered_json::array({rep.lambda_window->first, rep.lambda_window->second});
    else
        j["lambda_window"] = nullptr;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_classify(const GlobalOpts& g) {
    const SystemSpec spec = require_spec(g);
    const CaseReport rep = classify(spec.A0, spec.A1, spec.lam);
    ordered_json j;
    j["label"] = rep.label_name();
    j["verdict"] = rep.verdict_name();
    j["swapped"] = rep.swapped;
    j["degenerate"] = rep.degenerate;
    if (rep.invariant_interval)
        j["invariant_interval"] = ordered_json::array(
            {rep.invariant_interval->first, rep.invariant_interval->second});
    else
        j["invariant_interval"] = nullptr;
    j["profile"] = {{"theta_minus", rep.profile.theta_minus},
                    {"theta_plus", rep.profile.theta_plus},
                    {"lambda_plus", rep.profile.lambda_plus},
                    {"lambda_minus", rep.profile.lambda_minus},
                    {"lambda", rep.profile.lam}};
    const auto zeros_json = [](const std::vector<CaseReport::ZeroRec>& zs) {
        ordered_json arr = ordered_json::array();
        for (const auto& z : zs) {
            arr.push_back({{"angle", z.angle},
                           {"angle_lifted", z.angle_lifted},
                           {"touching", z.touching},
                           {"side", z.side}});
        }
        return arr;
    };
    j["zeros0"] = zeros_json(rep.zeros0);
    j["zeros1"] = zeros_json(rep.zeros1);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_expm(const GlobalOpts& g, double time, const std::string& which) {
    const SystemSpec spec = require_spec(g);
    Mat2 M;
    if (which == "A0")
        M = spec.A0;
    else if (which == "A1")
        M = spec.A1;
    else if (which == "Alam")
        M = convex_combination(spec.A0, spec.A1, spec.lam);
    else
        throw std::domain_error("--matrix must be A0, A1 or Alam");
    const Mat2 E = expm(M, time);
    ordered_json j;
    j["which"] = which;
    j["t"] = time;
    j["exp"] = mat_json(E);
    j["det"] = E.det();
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_chi_mc(const GlobalOpts& g, std::optional<double> beta_override,
               std::optional<double> theta0_opt, int i0, double burn_in) {
    const SystemSpec spec = require_spec(g);
    const double beta = beta_override.value_or(spec.beta);
    const SwitchedSystem sys = spec.system_at(beta);
    const double theta0 = theta0_opt.value_or(default_theta0(spec));

    try {
        const CaseReport rep = classify(spec.A0, spec.A1, spec.lam);
        if (rep.verdict == CaseReport::Verdict::TwoRecurrentClasses)
            std::cerr << "note: two recurrent angular classes; the estimate is "
                         "conditional on the class entered (the limit is the same "
                         "for both by symmetry)\n";
    } catch (const std::exception&) {
        // classification is advisory here; estimation proceeds regardless
    }

    const LyapunovEstimate est =
        simulate_chi(sys, theta0, i0, g.horizon, g.replicas, g.seed, burn_in);
    ordered_json j = estimate_json(est);
    j["beta"] = beta;
    j["theta0"] = theta0;
    j["i0"] = i0;
    j["burn_in"] = burn_in;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_chi_exact(const GlobalOpts& g, std::optional<double> beta_override) {
    const SystemSpec spec = require_spec(g);
    const ExactModel& model = require_family(spec, "chi-exact");
    const double beta = beta_override.value_or(spec.beta);
    const ChiEvaluation ev = chi_exact_info(model, beta);
    ordered_json j;
    j["family"] = model.family_name();
    j["beta"] = beta;
    j["chi"] = ev.value;
    j["error_estimate"] = ev.error_estimate;
    j["method"] = ev.peak_expansion ? "peak-expansion" : "quadrature";
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_beta_c(const GlobalOpts& g, double tol) {
    const SystemSpec spec = require_spec(g);
    const ExactModel& model = require_family(spec, "beta-c");
    const double bc = beta_c(model, tol);
    const ChiLimits lim = chi_limits(model);
    ordered_json j;
    j["family"] = model.family_name();
    j["beta_c"] = bc;
    j["tol"] = tol;
    j["chi_at_zero"] = lim.at_zero;
    j["chi_at_infinity"] = lim.at_infinity;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_density(const GlobalOpts& g, std::optional<double> beta_override, int grid_n) {
    const SystemSpec spec = require_spec(g);
    const ExactModel& model = require_family(spec, "density");
    const double beta = beta_override.value_or(spec.beta);
    const DensityEvaluation d = density(model, beta, grid_n);

    CsvTable t;
    std::string meta = std::string("family=") + model.family_name();
    if (model.family() == ExactModel::Family::Rotations)
        meta += " a=" + fmt(model.a());
    meta += " b=" + fmt(model.b()) + " beta=" + fmt(beta) +
            " grid_n=" + std::to_string(grid_n) + " log_c_beta=" + fmt(d.log_c_beta);
    t.meta.push_back(meta);
    t.header = {"theta", "weight_i0", "weight_i1"};
    for (std::size_t i = 0; i < d.theta.size(); ++i)
        t.rows.push_back({d.theta[i], d.rho0[i], d.rho1[i]});
    emit_csv(t, g.out_path);
    return kExitOk;
}

int cmd_sweep(const GlobalOpts& g, double burn_in) {
    const SystemSpec spec = require_spec(g);
    if (g.beta_grid.empty()) throw std::domain_error("sweep requires --beta-grid lo:hi:n[:log]");
    const std::vector<double> grid = parse_beta_grid(g.beta_grid);
    const double theta0 = default_theta0(spec);

    CsvTable t;
    t.meta.push_back("seed=" + std::to_string(g.seed) + " horizon=" + fmt(g.horizon) +
                     " replicas=" + std::to_string(g.replicas) +
                     " burn_in=" + fmt(burn_in) + " beta_grid=" + g.beta_grid);
    const bool family = spec.is_family();
    if (family)
        t.header = {"beta", "chi_exact", "chi_mc", "chi_mc_stderr"};
    else
        t.header = {"beta", "chi_mc", "chi_mc_stderr"};

    for (double beta : grid) {
        const LyapunovEstimate est = simulate_chi(spec.system_at(beta), theta0, 0,
                                                  g.horizon, g.replicas, g.seed, burn_in);
        if (family) {
            const double ce = chi_exact(*spec.model, beta);
            t.rows.push_back({beta, ce, est.value, est.std_error});
        } else {
            t.rows.push_back({beta, est.value, est.std_error});
        }
    }
    emit_csv(t, g.out_path);
    return kExitOk;
}

int cmd_products(const GlobalOpts& g, const std::string& variant_str,
                 std::int64_t renorm_period) {
    const SystemSpec spec = require_spec(g);
    ProductVariant variant;
    if (variant_str == "alternating")
        variant = ProductVariant::Alternating;
    else if (variant_str == "iid-halfsum")
        variant = ProductVariant::IidHalfSum;
    else
        throw std::domain_error("--variant must be alternating or iid-halfsum");

    const SwitchedSystem sys = spec.system();
    std::vector<std::int64_t> checkpoints;
    if (!g.out_path.empty()) {
        const int points = 200;
        for (int j = 1; j <= points; ++j) {
            const std::int64_t k = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(
                       static_cast<double>(j) / points * static_cast<double>(g.steps)));
            if (checkpoints.empty() || checkpoints.back() != k) checkpoints.push_back(k);
        }
    }
    std::vector<double> running;
    const ProductEstimate est =
        product_lyapunov(sys, variant, g.steps, g.replicas, g.seed, renorm_period,
                         checkpoints, checkpoints.empty() ? nullptr : &running);

    if (!g.out_path.empty()) {
        CsvTable t;
        t.meta.push_back("seed=" + std::to_string(g.seed) +
                         " variant=" + variant_name(variant) +
                         " steps=" + std::to_string(g.steps) +
                         " replicas=" + std::to_string(g.replicas) +
                         " beta=" + fmt(sys.beta));
        t.header = {"k", "estimate"};
        for (std::size_t c = 0; c < checkpoints.size(); ++c)
            t.rows.push_back({static_cast<double>(checkpoints[c]), running[c]});
        emit_csv(t, g.out_path);
    }

    ordered_json j;
    j["variant"] = variant_name(variant);
    j["value"] = est.value;
    j["std_error"] = est.std_error;
    j["steps"] = est.steps;
    j["replicas"] = est.replicas;
    j["seed"] = est.seed;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_certificate(const GlobalOpts& g) {
    const SystemSpec spec = require_spec(g);
    const ContractionCertificate cert =
        small_beta_certificate(spec.A0, spec.A1, spec.lam);
    ordered_json j;
    j["rho"] = cert.rho;
    j["kappa0"] = cert.kappa0;
    j["kappa1"] = cert.kappa1;
    if (std::isfinite(cert.beta1)) {
        j["beta1"] = cert.beta1;
        j["beta1_finite"] = true;
    } else {
        j["beta1"] = nullptr;
        j["beta1_finite"] = false;
    }
    j["M0"] = mat_json(cert.M0);
    j["M1"] = mat_json(cert.M1);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    const std::set<std::string> known = {"check",     "classify", "expm",
                                         "chi-mc",    "chi-exact", "beta-c",
                                         "density",   "sweep",    "products",
                                         "certificate"};
    // Reject unknown commands with the usage exit code before CLI11 parsing.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--help" || arg == "-h") break;
        if (!arg.empty() && arg[0] != '-') {
            if (!known.count(arg)) {
                std::cerr << "unknown command: " << arg << "\n";
                return kExitUsage;
            }
            break;
        }
        // skip the value of flags that take one
        if (arg.find('=') == std::string::npos && i + 1 < argc) ++i;
    }

    CLI::App app{"stability of planar randomly switched linear systems"};
    app.require_subcommand(1);

    GlobalOpts g;
    std::optional<double> beta_override;
    double expm_time = 1.0;
    std::string expm_which = "A0";
    std::optional<double> theta0_opt;
    int i0 = 0;
    double burn_in = 100.0;
    double bc_tol = 1e-10;
    int grid_n = 512;
    std::string variant_str = "alternating";
    std::int64_t renorm_period = 1;

    const auto add_global = [&](CLI::App* cmd) {
        cmd->add_option("--spec", g.spec_path, "system spec JSON file");
        cmd->add_option("--seed", g.seed, "master seed (default 0)");
        cmd->add_option("--out", g.out_path, "output file for CSV results");
        cmd->add_option("--replicas", g.replicas, "number of independent replicas");
        cmd->add_option("--horizon", g.horizon, "simulation horizon");
        cmd->add_option("--steps", g.steps, "number of product steps");
        cmd->add_option("--beta-grid", g.beta_grid, "sweep grid lo:hi:n[:log]");
        cmd->add_option("--beta", beta_override, "override the spec's beta");
        return cmd;
    };

    add_global(app.add_subcommand("check", "hyperbolicity criterion for the pair"));
    add_global(app.add_subcommand("classify", "case classification of the circle flows"));
    auto* c_expm = add_global(app.add_subcommand("expm", "closed-form matrix exponential"));
    c_expm->add_option("--time", expm_time, "flow time t");
    c_expm->add_option("--matrix", expm_which, "A0, A1 or Alam");
    auto* c_mc = add_global(app.add_subcommand("chi-mc", "Monte Carlo Lyapunov exponent"));
    c_mc->add_option("--theta0", theta0_opt, "initial angle (default theta_plus + 0.1)");
    c_mc->add_option("--i0", i0, "initial discrete state (default 0)");
    c_mc->add_option("--burn-in", burn_in, "discarded initial time (default 100)");
    add_global(app.add_subcommand("chi-exact", "closed-form chi(beta) by quadrature"));
    auto* c_bc = add_global(app.add_subcommand("beta-c", "critical switching rate"));
    c_bc->add_option("--tol", bc_tol, "|chi| tolerance at the root (default 1e-10)");
    auto* c_den = add_global(app.add_subcommand("density", "invariant angular density as CSV"));
    c_den->add_option("--grid-n", grid_n, "number of grid cells (default 512)");
    auto* c_sw = add_global(app.add_subcommand("sweep", "chi vs beta as CSV"));
    c_sw->add_option("--burn-in", burn_in, "discarded initial time (default 100)");
    auto* c_pr = add_global(app.add_subcommand("products", "random matrix product exponent"));
    c_pr->add_option("--variant", variant_str, "alternating or iid-halfsum");
    c_pr->add_option("--renorm-period", renorm_period, "steps between renormalizations");
    add_global(app.add_subcommand("certificate", "small-beta contraction certificate"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("check")) return cmd_check(g);
        if (app.got_subcommand("classify")) return cmd_classify(g);
        if (app.got_subcommand("expm")) return cmd_expm(g, expm_time, expm_which);
        if (app.got_subcommand("chi-mc")) return cmd_chi_mc(g, beta_override, theta0_opt, i0, burn_in);
        if (app.got_subcommand("chi-exact")) return cmd_chi_exact(g, beta_override);
        if (app.got_subcommand("beta-c")) return cmd_beta_c(g, bc_tol);
        if (app.got_subcommand("density")) return cmd_density(g, beta_override, grid_n);
        if (app.got_subcommand("sweep")) return cmd_sweep(g, burn_in);
        if (app.got_subcommand("products")) return cmd_products(g, variant_str, renorm_period);
        if (app.got_subcommand("certificate")) return cmd_certificate(g);
        std::cerr << "no command given\n";
        return kExitUsage;
    } catch (const SpecIOError& e) {
        std::cerr << e.what() << "\n";
        return kExitNoInput;
    } catch (const NoTransition& e) {
        std::cerr << e.what() << "\n";
        return kExitPrecondition;
    } catch (const NoHyperbolicSplit& e) {
        std::cerr << e.what() << "\n";
        return kExitPrecondition;
    } catch (const NumericalDegeneracy& e) {
        std::cerr << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::domain_error& e) {
        std::cerr << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
