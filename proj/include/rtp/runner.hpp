#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtp/config.hpp"
#include "rtp/experiments.hpp"
#include "rtp/format.hpp"
#include "rtp/report_json.hpp"
#include "rtp/version.hpp"

namespace rtp {

struct ExperimentOutcome {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::map<std::string, double> metrics;
    bool pass = true;
};

/// Section parameters with registry defaults behind them. Unknown keys are
/// schema violations and report the offending line.
class Params {
public:
    Params(const ConfigFile& cfg, const ConfigFile::Section* section,
           const std::map<std::string, std::string>& defaults, std::string kind)
        : section_(section), defaults_(defaults), kind_(std::move(kind)) {
        if (!section_) return;
        for (const auto& [key, entry] : section_->keys) {
            if (key == "enabled" || key == "seed_offset" || defaults_.count(key)) continue;
            throw config_error(cfg.path + ":" + std::to_string(entry.line) + ": unknown key '" +
                               key + "' in section [" + kind_ + "]");
        }
    }

    std::string get(const std::string& key) const {
        if (section_) {
            const auto it = section_->keys.find(key);
            if (it != section_->keys.end()) return it->second.value;
        }
        const auto dt = defaults_.find(key);
        if (dt == defaults_.end())
            throw config_error("[" + kind_ + "] has no default for key '" + key + "'");
        return dt->second;
    }

    double get_double(const std::string& key) const {
        return parse_double(get(key), "[" + kind_ + "]." + key);
    }
    int get_int(const std::string& key) const {
        return static_cast<int>(parse_int(get(key), "[" + kind_ + "]." + key));
    }
    bool get_bool(const std::string& key) const {
        return parse_bool(get(key), "[" + kind_ + "]." + key);
    }
    std::vector<int> get_int_list(const std::string& key) const {
        std::vector<int> out;
        for (const auto& cell : split_list(get(key)))
            out.push_back(static_cast<int>(parse_int(cell, "[" + kind_ + "]." + key)));
        if (out.empty()) throw config_error("[" + kind_ + "]." + key + ": empty list");
        return out;
    }
    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& cell : split_list(get(key)))
            out.push_back(parse_double(cell, "[" + kind_ + "]." + key));
        return out;
    }
    Interval get_interval(const std::string& key) const {
        const auto cells = get_double_list(key);
        if (cells.size() != 2) throw config_error("[" + kind_ + "]." + key + ": expected 'lo,hi'");
        return Interval::from_endpoints(cells[0], cells[1]);
    }

private:
    const ConfigFile::Section* section_;
    const std::map<std::string, std::string>& defaults_;
    std::string kind_;
};

struct RunContext {
    CoefficientModel model;
    std::uint64_t master_seed = 0;
};

struct ExperimentInfo {
    std::string name;
    std::string anchor;            // the mathematical statement being checked
    std::string default_tolerance; // shown by list-experiments
    std::map<std::string, std::string> defaults;
    std::function<ExperimentOutcome(const Params&, const RunContext&)> run;
};

namespace detail {

inline std::string fmt(double v) { return format_double(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(long v) { return std::to_string(v); }

inline std::vector<double> parse_h_list(const Params& par, int n) {
    std::vector<double> out;
    for (const auto& cell : split_list(par.get("h_list"))) {
        if (cell == "2pi_over_n")
            out.push_back(two_pi / n);
        else
            out.push_back(parse_double(cell, "h_list"));
    }
    return out;
}

} // namespace detail

inline const std::vector<ExperimentInfo>& experiment_registry() {
    static const std::vector<ExperimentInfo> registry = [] {
        std::vector<ExperimentInfo> reg;

        reg.push_back(
            {"nodal_convergence",
             "a.s. nodal density: N(f_n,[a,b])/n -> (b-a)/(pi*sqrt(3))",
             "|N/n - limit| <= 0.05 at the largest n",
             {{"n_list", "250,500,1000,2000"},
              {"interval", "0,6.283185307179586"},
              {"oversample", "32"},
              {"tolerance", "0.05"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 const auto rows = nodal_convergence(ctx.model, par.get_int_list("n_list"),
                                                     par.get_interval("interval"), ctx.master_seed,
                                                     par.get_int("oversample"));
                 out.columns = {"n", "count", "ratio", "limit", "flagged_cells"};
                 for (const auto& r : rows)
                     out.rows.push_back({detail::fmt(r.n), detail::fmt(r.count), detail::fmt(r.ratio),
                                         detail::fmt(r.limit), detail::fmt(r.flagged_cells)});
                 const auto& last = rows.back();
                 out.metrics["final_n"] = last.n;
                 out.metrics["final_ratio"] = last.ratio;
                 out.metrics["limit"] = last.limit;
                 out.metrics["final_abs_error"] = std::abs(last.ratio - last.limit);
                 out.metrics["flagged_cells_total"] = 0;
                 for (const auto& r : rows) out.metrics["flagged_cells_total"] += r.flagged_cells;
                 out.pass = out.metrics["final_abs_error"] <= par.get_double("tolerance") &&
                            last.flagged_cells == 0;
                 return out;
             }});

        reg.push_back(
            {"nodal_average",
             "mean nodal density over independent draws -> (b-a)/(pi*sqrt(3))",
             "|mean - limit| <= 0.01 over 50 trials at n = 2000",
             {{"n", "2000"},
              {"trials", "50"},
              {"interval", "0,6.283185307179586"},
              {"oversample", "32"},
              {"tolerance", "0.01"},
              {"max_flagged_fraction", "0.01"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 const auto avg =
                     nodal_average(ctx.model, par.get_int("n"), par.get_int("trials"),
                                   par.get_interval("interval"), ctx.master_seed,
                                   par.get_int("oversample"));
                 out.columns = {"trial", "ratio"};
                 for (std::size_t t = 0; t < avg.ratios.size(); ++t)
                     out.rows.push_back({detail::fmt(static_cast<int>(t)), detail::fmt(avg.ratios[t])});
                 out.metrics["mean"] = avg.mean;
                 out.metrics["stderr"] = avg.stderr_mean;
                 out.metrics["limit"] = avg.limit;
                 out.metrics["abs_error"] = std::abs(avg.mean - avg.limit);
                 out.metrics["flagged_trials"] = avg.flagged_trials;
                 const double flagged_fraction =
                     static_cast<double>(avg.flagged_trials) / par.get_int("trials");
                 out.pass = out.metrics["abs_error"] <= par.get_double("tolerance") &&
                            flagged_fraction <= par.get_double("max_flagged_fraction");
                 return out;
             }});

        reg.push_back(
            {"local_zero_distribution",
             "N(g_n,[0,2pi]) under P_X converges in law to N(g_inf,[0,2pi])",
             "|mean - 2/sqrt(3)| <= 0.1 and histogram TV <= 0.15 at n = 2048",
             {{"n", "2048"},
              {"x_samples", "2000"},
              {"gp_trials", "2000"},
              {"gp_grid", "256"},
              {"mean_tolerance", "0.1"},
              {"tv_tolerance", "0.15"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 const auto d = local_zero_distribution(ctx.model, par.get_int("n"),
                                                        par.get_int("x_samples"),
                                                        par.get_int("gp_trials"),
                                                        par.get_int("gp_grid"), ctx.master_seed);
                 out.columns = {"k", "p_local", "p_limit"};
                 for (std::size_t k = 0; k < d.hist_n.size(); ++k)
                     out.rows.push_back({detail::fmt(static_cast<int>(k)), detail::fmt(d.hist_n[k]),
                                         detail::fmt(d.hist_gp[k])});
                 out.metrics["mean_local"] = d.mean_n;
                 out.metrics["mean_limit"] = d.mean_gp;
                 out.metrics["histogram_tv"] = d.tv;
                 out.metrics["kac_rice"] = expected_zeros(0.0, two_pi);
                 out.pass = std::abs(d.mean_n - expected_zeros(0.0, two_pi)) <=
                                par.get_double("mean_tolerance") &&
                            d.tv <= par.get_double("tv_tolerance");
                 return out;
             }});

        reg.push_back(
            {"local_moment_boundedness",
             "sup_n E_X[N(g_n,[0,2pi])^p] < infinity for p in {1,2,3,4}",
             "p=2 values <= 10, p=4 values <= 100",
             {{"n_list", "256,1024,4096"},
              {"p_list", "1,2,3,4"},
              {"budget_p1", "10"},
              {"budget_p2", "10"},
              {"budget_p3", "100"},
              {"budget_p4", "100"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 const auto rows = local_moment_boundedness(ctx.model, par.get_int_list("n_list"),
                                                            par.get_int_list("p_list"),
                                                            ctx.master_seed);
                 out.columns = {"n", "p", "value"};
                 out.pass = true;
                 for (const auto& r : rows) {
                     out.rows.push_back({detail::fmt(r.n), detail::fmt(r.p), detail::fmt(r.value)});
                     const double budget = par.get_double("budget_p" + std::to_string(r.p));
                     const std::string key = "max_p" + std::to_string(r.p);
                     out.metrics[key] = std::max(out.metrics.count(key) ? out.metrics[key] : 0.0,
                                                 r.value);
                     if (r.value > budget) out.pass = false;
                 }
                 return out;
             }});

        reg.push_back(
            {"log_moment_scan",
             "E_X[|log|f_n(X)||^p] bounded uniformly in n",
             "p=2 values <= 5 and log-log slope <= 0.1",
             {{"n_list", "128,512,2048"},
              {"p", "2"},
              {"budget", "5"},
              {"slope_tolerance", "0.1"},
              {"grid_factor", "16"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 const auto rows = log_moment_scan(ctx.model, par.get_int_list("n_list"),
                                                   par.get_int("p"), ctx.master_seed,
                                                   par.get_int("grid_factor"));
                 out.columns = {"n", "value", "excluded_points"};
                 std::vector<double> lx, ly;
                 double maxval = 0.0;
                 long excluded = 0;
                 for (const auto& r : rows) {
                     out.rows.push_back({detail::fmt(r.n), detail::fmt(r.value), detail::fmt(r.excluded)});
                     lx.push_back(std::log(static_cast<double>(r.n)));
                     ly.push_back(std::log(r.value));
                     maxval = std::max(maxval, r.value);
                     excluded += r.excluded;
                 }
                 const auto fit = detail::fit_line(lx, ly);
                 out.metrics["max_value"] = maxval;
                 out.metrics["slope"] = fit.slope;
                 out.metrics["excluded_points"] = static_cast<double>(excluded);
                 out.pass = maxval <= par.get_double("budget") &&
                            fit.slope <= par.get_double("slope_tolerance") && excluded == 0;
                 return out;
             }});

        reg.push_back(
            {"nonuniform_clt",
             "f_n(X) -> N(0,1) for X with polynomially decaying Fourier coefficients",
             "Kolmogorov distance <= 0.05 at n = 4096",
             {{"c_list", "0.5"},
              {"n", "4096"},
              {"samples", "100000"},
              {"tolerance", "0.05"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 const NonUniformDensity density(par.get_double_list("c_list"));
                 const double d = nonuniform_clt(ctx.model, density, par.get_int("n"),
                                                 par.get_int("samples"), ctx.master_seed);
                 out.columns = {"j", "c_j", "fourier_coefficient"};
                 for (std::size_t j = 0; j < density.coeffs().size(); ++j)
                     out.rows.push_back({detail::fmt(static_cast<int>(j + 1)),
                                         detail::fmt(density.coeffs()[j]),
                                         detail::fmt(density.fourier_coefficient(static_cast<int>(j + 1)))});
                 out.metrics["kolmogorov"] = d;
                 out.pass = d <= par.get_double("tolerance");
                 return out;
             }});

        reg.push_back(
            {"empirical_measure_uniformity",
             "empirical measure of the roots -> normalized Lebesgue measure",
             "sup bin deviation <= 0.02 with 16 bins at n = 4096",
             {{"n", "4096"}, {"bins", "16"}, {"tolerance", "0.02"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 RngStream stream = RngStream::derive(
                     ctx.master_seed, RngStream::compose_key(salt::uniformity, 0));
                 const auto p = sample_polynomial(ctx.model, par.get_int("n"), stream);
                 const auto rep = count_zeros_grid(p);
                 const double dev = empirical_measure_uniformity(rep, par.get_int("bins"));
                 out.columns = {"bins", "count", "sup_deviation"};
                 out.rows.push_back({detail::fmt(par.get_int("bins")), detail::fmt(rep.count),
                                     detail::fmt(dev)});
                 out.metrics["sup_deviation"] = dev;
                 out.metrics["count"] = rep.count;
                 out.pass = dev <= par.get_double("tolerance") && !rep.flagged();
                 return out;
             }});

        reg.push_back(
            {"rate_regression",
             "mean distance to the Gaussian decays like n^{-1/2}",
             "log-log slope in [-0.65, -0.35]",
             {{"n_list", "64,256,1024,4096"},
              {"trials", "20"},
              {"metric", "kolmogorov"},
              {"slope_min", "-0.65"},
              {"slope_max", "-0.35"},
              {"grid_factor", "16"}},
             [](const Params& par, const RunContext& ctx) {
                 const std::string mname = par.get("metric");
                 RateMetric metric;
                 if (mname == "kolmogorov")
                     metric = RateMetric::kolmogorov;
                 else if (mname == "cf")
                     metric = RateMetric::cf;
                 else if (mname == "c3_proxy")
                     metric = RateMetric::c3_proxy;
                 else
                     throw config_error("[rate_regression].metric: unknown metric '" + mname + "'");

                 ExperimentOutcome out;
                 const auto rr = rate_regression(ctx.model, par.get_int_list("n_list"),
                                                 par.get_int("trials"), metric, ctx.master_seed,
                                                 par.get_int("grid_factor"));
                 out.columns = {"n", "mean_" + mname};
                 for (const auto& [n, mean] : rr.means)
                     out.rows.push_back({detail::fmt(n), detail::fmt(mean)});
                 out.metrics["slope"] = rr.fit.slope;
                 out.metrics["intercept"] = rr.fit.intercept;
                 out.metrics["r2"] = rr.fit.r2;
                 out.metrics["strictly_decreasing"] = rr.strictly_decreasing ? 1.0 : 0.0;
                 out.pass = rr.fit.slope >= par.get_double("slope_min") &&
                            rr.fit.slope <= par.get_double("slope_max");
                 return out;
             }});

        reg.push_back(
            {"stein_bound_check",
             "E[d_C3(f_n(X),G)] <= C(a1)/sqrt(n) (Stein-method bound)",
             "mean proxy <= bound with a >= 3 standard-error margin",
             {{"models", "rademacher,gaussian,uniform"},
              {"n_list", "16,64,256,1024"},
              {"trials", "100"},
              {"margin_stderr", "3"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 out.columns = {"model", "n", "mean_proxy", "stderr", "bound", "pass"};
                 out.pass = true;
                 const double margin = par.get_double("margin_stderr");
                 double worst = 1e300;
                 for (const auto& mname : split_list(par.get("models"))) {
                     const auto model = CoefficientModel::by_name(mname);
                     for (int n : par.get_int_list("n_list")) {
                         const auto r = stein_bound_check(model, n, par.get_int("trials"),
                                                          ctx.master_seed);
                         const bool ok = r.mean_proxy + margin * r.stderr_proxy <= r.bound;
                         out.rows.push_back({mname, detail::fmt(n), detail::fmt(r.mean_proxy),
                                             detail::fmt(r.stderr_proxy), detail::fmt(r.bound),
                                             ok ? "true" : "false"});
                         worst = std::min(worst, (r.bound - r.mean_proxy) /
                                                     std::max(r.stderr_proxy, 1e-300));
                         if (!ok) out.pass = false;
                     }
                 }
                 out.metrics["worst_margin_stderr"] = worst;
                 return out;
             }});

        reg.push_back(
            {"window_identity",
             "(h/2pi) N(f,[0,2pi]) = E_X[N(f,[X,X+h])] (window-count identity)",
             "|lhs - rhs| <= 0.01 * max(1, lhs)",
             {{"n", "256"},
              {"count", "20"},
              {"h_list", "2pi_over_n,0.7853981633974483,3.141592653589793"},
              {"mx", "4096"},
              {"tolerance", "0.01"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 out.columns = {"poly", "h", "lhs", "rhs", "abs_error"};
                 out.pass = true;
                 const int n = par.get_int("n");
                 const auto hs = detail::parse_h_list(par, n);
                 double worst = 0.0;
                 for (int t = 0; t < par.get_int("count"); ++t) {
                     RngStream stream = RngStream::derive(
                         ctx.master_seed, RngStream::compose_key(salt::window, t));
                     const auto p = sample_polynomial(ctx.model, n, stream);
                     for (double h : hs) {
                         const auto wi = window_identity_check(p, h, par.get_int("mx"));
                         const double err = std::abs(wi.lhs - wi.rhs);
                         out.rows.push_back({detail::fmt(t), detail::fmt(h), detail::fmt(wi.lhs),
                                             detail::fmt(wi.rhs), detail::fmt(err)});
                         worst = std::max(worst, err / std::max(1.0, wi.lhs));
                         if (err > par.get_double("tolerance") * std::max(1.0, wi.lhs))
                             out.pass = false;
                     }
                 }
                 out.metrics["worst_relative_error"] = worst;
                 return out;
             }});

        reg.push_back(
            {"epsilon_identity",
             "E_{X,Y}[eps_n(X,Y)^2] = 1/(2n) exactly",
             "quadrature within 1e-6 of 1/(2n)",
             {{"n_list", "1,10,50,500"}, {"mq", "8192"}, {"tolerance", "1e-6"}},
             [](const Params& par, const RunContext&) {
                 ExperimentOutcome out;
                 out.columns = {"n", "value", "target", "abs_error"};
                 out.pass = true;
                 double worst = 0.0;
                 for (int n : par.get_int_list("n_list")) {
                     const double v = epsilon_n_second_moment(n, par.get_int("mq"));
                     const double target = 0.5 / n;
                     const double err = std::abs(v - target);
                     out.rows.push_back({detail::fmt(n), detail::fmt(v), detail::fmt(target),
                                         detail::fmt(err)});
                     worst = std::max(worst, err);
                     if (err > par.get_double("tolerance")) out.pass = false;
                 }
                 out.metrics["worst_abs_error"] = worst;
                 return out;
             }});

        reg.push_back(
            {"antilde_bound",
             "averaged leave-one-out characteristic term is O(1/n) with explicit constant",
             "estimate <= (13+|E a^3|)(xi^4+xi^3+xi^2+1)/n within 3 standard errors",
             {{"model", "rademacher"},
              {"n_list", "16,64"},
              {"xi_list", "0.5,1,2"},
              {"trials", "100"},
              {"grid_factor", "4"},
              {"margin_stderr", "3"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 out.columns = {"n", "xi", "estimate", "stderr", "bound"};
                 out.pass = true;
                 const auto model = CoefficientModel::by_name(par.get("model"));
                 for (int n : par.get_int_list("n_list")) {
                     const int M = detail::grid_size_for(n, par.get_int("grid_factor"));
                     for (double xi : par.get_double_list("xi_list")) {
                         const auto r = antilde_estimate(model, n, xi, par.get_int("trials"), M,
                                                         ctx.master_seed);
                         out.rows.push_back({detail::fmt(n), detail::fmt(xi), detail::fmt(r.estimate),
                                             detail::fmt(r.stderr_estimate), detail::fmt(r.bound)});
                         if (r.estimate > r.bound + par.get_double("margin_stderr") * r.stderr_estimate)
                             out.pass = false;
                     }
                 }
                 return out;
             }});

        reg.push_back(
            {"sinc_zero_mean",
             "Kac-Rice value: E[N(g_inf,[0,2pi])] = 2/sqrt(3), two independent simulators",
             "each mean within 3 stderr of the value; methods within 1 combined stderr",
             {{"trials", "2000"},
              {"grid_size", "256"},
              {"q", "256"},
              {"interval", "0,6.283185307179586"},
              {"margin_stderr", "3"},
              {"cross_stderr", "1"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 const auto iv = par.get_interval("interval");
                 const double a = iv.lo, b = iv.lo + iv.length;
                 const auto chol = mc_zero_mean(par.get_int("trials"), par.get_int("grid_size"),
                                                ctx.master_seed, "cholesky", a, b, par.get_int("q"));
                 const auto spec = mc_zero_mean(par.get_int("trials"), par.get_int("grid_size"),
                                                ctx.master_seed + 1, "spectral", a, b,
                                                par.get_int("q"));
                 out.columns = {"method", "mean", "stderr", "expected"};
                 out.rows.push_back({"cholesky", detail::fmt(chol.mean), detail::fmt(chol.stderr_mean),
                                     detail::fmt(chol.expected)});
                 out.rows.push_back({"spectral", detail::fmt(spec.mean), detail::fmt(spec.stderr_mean),
                                     detail::fmt(spec.expected)});
                 const double cross = std::abs(chol.mean - spec.mean);
                 const double cross_se = std::sqrt(chol.stderr_mean * chol.stderr_mean +
                                                   spec.stderr_mean * spec.stderr_mean);
                 out.metrics["cholesky_mean"] = chol.mean;
                 out.metrics["spectral_mean"] = spec.mean;
                 out.metrics["expected"] = chol.expected;
                 out.metrics["cross_difference"] = cross;
                 out.metrics["cross_stderr"] = cross_se;
                 const double margin = par.get_double("margin_stderr");
                 out.pass = std::abs(chol.mean - chol.expected) <= margin * chol.stderr_mean &&
                            std::abs(spec.mean - spec.expected) <= margin * spec.stderr_mean &&
                            cross <= par.get_double("cross_stderr") * cross_se;
                 return out;
             }});

        reg.push_back(
            {"covariance_convergence",
             "E_X[g_n(t)g_n(s)] -> sin(t-s)/(t-s) uniformly on the grid",
             "sup over a 64x64 (t,s) grid <= 0.08 at n = 4096",
             {{"n", "4096"}, {"grid_points", "64"}, {"tolerance", "0.08"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 RngStream stream = RngStream::derive(
                     ctx.master_seed, RngStream::compose_key(salt::covariance, 0));
                 const auto p = sample_polynomial(ctx.model, par.get_int("n"), stream);
                 const int g = par.get_int("grid_points");
                 // t,s on the same uniform grid: tau = (i-j)*step covers all pairs
                 double sup = 0.0;
                 out.columns = {"tau", "covariance", "sinc", "abs_error"};
                 for (int d = -(g - 1); d < g; ++d) {
                     const double tau = two_pi * d / (g - 1);
                     const double cov = local_covariance_exact(p, tau);
                     const double err = std::abs(cov - sinc_cov(tau));
                     sup = std::max(sup, err);
                     out.rows.push_back({detail::fmt(tau), detail::fmt(cov),
                                         detail::fmt(sinc_cov(tau)), detail::fmt(err)});
                 }
                 out.metrics["sup_error"] = sup;
                 out.pass = sup <= par.get_double("tolerance");
                 return out;
             }});

        reg.push_back(
            {"tv_convergence",
             "d_TV(f_n(X), G) -> 0 (total variation convergence)",
             "TV decreasing over n_list and <= 0.1 at the largest n",
             {{"n_list", "256,1024,4096"}, {"tolerance", "0.1"}, {"grid_factor", "16"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 RngStream stream = RngStream::derive(
                     ctx.master_seed, RngStream::compose_key(salt::tv_scan, 0));
                 const auto n_list = par.get_int_list("n_list");
                 const auto polys = detail::prefix_polynomials(ctx.model, n_list, stream);
                 out.columns = {"n", "tv"};
                 bool decreasing = true;
                 double prev = 1e300, last = 0.0;
                 for (std::size_t i = 0; i < polys.size(); ++i) {
                     const auto g = eval_grid(polys[i],
                                              detail::grid_size_for(n_list[i], par.get_int("grid_factor")));
                     last = tv_to_gaussian(g.values);
                     out.rows.push_back({detail::fmt(n_list[i]), detail::fmt(last)});
                     if (last >= prev) decreasing = false;
                     prev = last;
                 }
                 out.metrics["final_tv"] = last;
                 out.metrics["decreasing"] = decreasing ? 1.0 : 0.0;
                 out.pass = decreasing && last <= par.get_double("tolerance");
                 return out;
             }});

        reg.push_back(
            {"oracle_equivalence",
             "grid zero counts equal the companion-matrix oracle counts",
             "0 mismatches over 100 Gaussian + 100 Rademacher draws, n in {4..64}",
             {{"count_per_model", "100"}, {"n_set", "4,8,16,32,64"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 out.columns = {"model", "n", "trial", "grid_count", "companion_count", "flagged"};
                 const auto n_set = par.get_int_list("n_set");
                 int mismatches = 0, flagged = 0, compared = 0;
                 int model_index = 0;
                 for (const auto* name : {"gaussian", "rademacher"}) {
                     const auto model = CoefficientModel::by_name(name);
                     for (int t = 0; t < par.get_int("count_per_model"); ++t) {
                         const int n = n_set[t % n_set.size()];
                         RngStream stream = RngStream::derive(
                             ctx.master_seed,
                             RngStream::compose_key(salt::oracle, model_index * 65536 + t));
                         const auto p = sample_polynomial(model, n, stream);
                         const auto grid = count_zeros_grid(p);
                         const auto comp = count_zeros_companion(p);
                         const bool f = grid.flagged() || comp.flagged();
                         out.rows.push_back({name, detail::fmt(n), detail::fmt(t),
                                             detail::fmt(grid.count), detail::fmt(comp.count),
                                             f ? "true" : "false"});
                         if (f) {
                             ++flagged;
                             continue;
                         }
                         ++compared;
                         if (grid.count != comp.count) ++mismatches;
                     }
                     ++model_index;
                 }
                 out.metrics["mismatches"] = mismatches;
                 out.metrics["flagged"] = flagged;
                 out.metrics["compared"] = compared;
                 out.pass = mismatches == 0 && compared > 0;
                 return out;
             }});

        reg.push_back(
            {"distances",
             "Kolmogorov / CF / TV / C3-proxy distances per realization (logged, no assertion)",
             "reporting only",
             {{"n_list", "64,256,1024,4096"}, {"trials", "3"}, {"grid_factor", "16"}},
             [](const Params& par, const RunContext& ctx) {
                 ExperimentOutcome out;
                 out.columns = {"model", "n", "seed", "kolmogorov", "cf_dev", "tv", "c3_proxy", "M"};
                 for (int n : par.get_int_list("n_list")) {
                     for (int t = 0; t < par.get_int("trials"); ++t) {
                         RngStream stream = RngStream::derive(
                             ctx.master_seed,
                             RngStream::compose_key(salt::distances,
                                                    static_cast<std::uint32_t>(n) * 64 + t));
                         const auto p = sample_polynomial(ctx.model, n, stream);
                         const auto rep = distance_report(p, par.get_int("grid_factor"));
                         out.rows.push_back({ctx.model.name, detail::fmt(n), detail::fmt(t),
                                             detail::fmt(rep.kolmogorov), detail::fmt(rep.cf_deviation),
                                             detail::fmt(rep.tv), detail::fmt(rep.c3_proxy),
                                             detail::fmt(rep.grid_M)});
                     }
                 }
                 out.metrics["rows"] = static_cast<double>(out.rows.size());
                 out.pass = true;
                 return out;
             }});

        return reg;
    }();
    return registry;
}

// --- run orchestration -------------------------------------------------------

struct RunResult {
    int exit_code = 0;
    bool all_pass = true;
    std::vector<ExperimentOutcome> outcomes;
    std::string output_dir;
};

namespace detail {

inline void write_csv(const std::filesystem::path& path, const ExperimentOutcome& out) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < out.columns.size(); ++c)
        f << (c ? "," : "") << out.columns[c];
    f << "\n";
    for (const auto& row : out.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << row[c];
        f << "\n";
    }
}

} // namespace detail

/// Executes the experiments enabled in the config. Returns exit code 0 when
/// every enabled assertion passes, 2 when one fails; configuration errors
/// throw config_error (the CLI maps those to exit 1).
inline RunResult run_config(const ConfigFile& cfg, const std::string& default_output_dir = "") {
    RunContext ctx;
    const auto model_it = cfg.globals.find("model");
    ctx.model = CoefficientModel::by_name(model_it != cfg.globals.end() ? model_it->second.value
                                                                        : "gaussian");
    const auto seed_it = cfg.globals.find("master_seed");
    ctx.master_seed =
        seed_it != cfg.globals.end() ? parse_u64(seed_it->second.value, "master_seed") : 20240601;

    std::string out_dir = default_output_dir.empty() ? "out" : default_output_dir;
    const auto dir_it = cfg.globals.find("output_dir");
    if (dir_it != cfg.globals.end()) out_dir = dir_it->second.value;

    for (const auto& [key, entry] : cfg.globals)
        if (key != "model" && key != "master_seed" && key != "output_dir")
            throw config_error(cfg.path + ":" + std::to_string(entry.line) +
                               ": unknown global key '" + key + "'");
    for (const auto& section : cfg.sections) {
        bool known = false;
        for (const auto& info : experiment_registry())
            if (info.name == section.name) known = true;
        if (!known)
            throw config_error(cfg.path + ":" + std::to_string(section.line) +
                               ": unknown experiment section [" + section.name + "]");
    }

    std::filesystem::create_directories(out_dir);

    RunResult result;
    result.output_dir = out_dir;
    nlohmann::json summary;
    nlohmann::json manifest;
    manifest["code_version"] = version_string;
    manifest["master_seed"] = ctx.master_seed;
    manifest["model"] = ctx.model.name;
    manifest["config_path"] = cfg.path;
    nlohmann::json config_echo;
    for (const auto& [k, e] : cfg.globals) config_echo["globals"][k] = e.value;
    for (const auto& s : cfg.sections)
        for (const auto& [k, e] : s.keys) config_echo[s.name][k] = e.value;
    manifest["config_echo"] = config_echo;

    summary["master_seed"] = ctx.master_seed;
    summary["model"] = ctx.model.name;

    for (const auto& info : experiment_registry()) {
        const auto* section = cfg.find(info.name);
        if (!section) continue;
        const Params params(cfg, section, info.defaults, info.name);
        const auto en = section->keys.find("enabled");
        if (en != section->keys.end() &&
            !parse_bool(en->second.value, "[" + info.name + "].enabled"))
            continue;

        // optional per-experiment seed shift on top of the master seed
        RunContext ectx = ctx;
        const auto so = section->keys.find("seed_offset");
        if (so != section->keys.end())
            ectx.master_seed += parse_u64(so->second.value, "[" + info.name + "].seed_offset");

        const auto t0 = std::chrono::steady_clock::now();
        ExperimentOutcome outcome = info.run(params, ectx);
        outcome.kind = info.name;
        const auto t1 = std::chrono::steady_clock::now();

        const std::filesystem::path csv_path =
            std::filesystem::path(out_dir) / (info.name + ".csv");
        detail::write_csv(csv_path, outcome);

        nlohmann::json ex;
        ex["pass"] = outcome.pass;
        for (const auto& [k, v] : outcome.metrics) ex["metrics"][k] = v;
        summary["experiments"][info.name] = ex;
        manifest["outputs"][info.name] = csv_path.string();
        manifest["wall_clock_ms"][info.name] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        manifest["pass"][info.name] = outcome.pass;

        if (!outcome.pass) result.all_pass = false;
        result.outcomes.push_back(std::move(outcome));
    }

    summary["all_pass"] = result.all_pass;
    {
        std::ofstream f(std::filesystem::path(out_dir) / "summary.json");
        f << summary.dump(2) << "\n";
    }
    {
        std::ofstream f(std::filesystem::path(out_dir) / "manifest.json");
        f << manifest.dump(2) << "\n";
    }
    result.exit_code = result.all_pass ? 0 : 2;
    return result;
}

/// Stable listing of the registered experiment kinds.
inline std::string list_experiments_text() {
    std::string out;
    std::size_t name_w = 0, anchor_w = 0;
    for (const auto& info : experiment_registry()) {
        name_w = std::max(name_w, info.name.size());
        anchor_w = std::max(anchor_w, info.anchor.size());
    }
    for (const auto& info : experiment_registry()) {
        out += info.name;
        out.append(name_w - info.name.size() + 2, ' ');
        out += info.anchor;
        out.append(anchor_w - info.anchor.size() + 2, ' ');
        out += info.default_tolerance;
        out += "\n";
    }
    return out;
}

} // namespace rtp
