#include "nmd/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "nmd/config.hpp"
#include "nmd/error.hpp"
#include "nmd/estimation.hpp"
#include "nmd/io.hpp"
#include "nmd/risk.hpp"
#include "nmd/simulation.hpp"
#include "nmd/stress.hpp"

namespace nmd {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Context {
    RunConfig cfg;
    std::string label;  // gaussian | nig | stressed
    ArtifactMeta meta;
    std::ostream& log;
};

Context make_context(const std::string& command, const std::string& config_path, const CliOverrides& o,
                     std::ostream& log) {
    RunConfig cfg = load_config(config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.paths) cfg.n_paths = *o.paths;
    if (o.out) cfg.output_dir = *o.out;
    if (o.threads) cfg.threads = *o.threads;
    std::string label = to_string(cfg.noise_family);
    if (o.family) {
        if (*o.family == "stressed") {
            if (command != "simulate" && command != "risk")
                throw ConfigError("--family stressed applies to simulate and risk only");
            cfg.noise_family = NoiseFamily::Nig;
        } else {
            cfg.noise_family = parse_noise_family(*o.family);
        }
        cfg.estimation.noise_family = cfg.noise_family;
        label = *o.family;
    }
    cfg.validate();
    ArtifactMeta meta{kToolVersion, cfg.seed, config_hash(cfg)};
    return {std::move(cfg), std::move(label), std::move(meta), log};
}

std::string out_path(const Context& ctx, const std::string& name) {
    return (fs::path(ctx.cfg.output_dir) / name).string();
}

std::string require_artifact(const Context& ctx, const std::string& name, const std::string& producer) {
    const std::string path = out_path(ctx, name);
    if (!fs::exists(path))
        throw MissingArtifactError("missing upstream artifact " + path + "; run '" + producer + "' first");
    return path;
}

SeriesPanel load_panel(const RunConfig& cfg) {
    IngestOptions io;
    io.rate_transform = cfg.rate_transform;
    io.rate_floor = cfg.rate_floor;
    io.rates_in_percent = cfg.rates_in_percent;
    return ingest(cfg.input_path, io);
}

ParamsFile load_params(const Context& ctx, const std::string& label) {
    const std::string producer = label == "stressed" ? "stress" : "estimate --family " + label;
    const std::string path = require_artifact(ctx, "params_" + label + ".json", producer);
    return params_from_json(read_file(path), path);
}

std::string header(const Context& ctx) { return csv_meta_line(ctx.meta); }

// Empirical residual histogram with the fitted Gaussian and NIG densities
// evaluated at the bin centres.
std::string residual_histogram(const Context& ctx, const Var1Params& p, const std::vector<Vec3>& eps) {
    constexpr int kBins = 40;
    const bool nig = p.family == NoiseFamily::Nig;
    std::ostringstream os;
    os << header(ctx) << "component,bin_lower,bin_upper,bin_center,empirical_density,gaussian_pdf";
    if (nig) os << ",nig_pdf";
    os << '\n';
    for (std::size_t i = 0; i < 3; ++i) {
        double lo = eps[0][i], hi = eps[0][i];
        for (const auto& e : eps) {
            lo = std::min(lo, e[i]);
            hi = std::max(hi, e[i]);
        }
        if (!(hi > lo)) hi = lo + 1.0;
        const double width = (hi - lo) / kBins;
        std::vector<std::size_t> counts(kBins, 0);
        for (const auto& e : eps) {
            int b = static_cast<int>((e[i] - lo) / width);
            counts[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))]++;
        }
        const double s = p.sigma[i];
        for (int b = 0; b < kBins; ++b) {
            const double left = lo + b * width;
            const double centre = left + 0.5 * width;
            const double density = static_cast<double>(counts[b]) / (static_cast<double>(eps.size()) * width);
            const double z = centre / s;
            const double gauss = std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
            os << i + 1 << ',' << fmt(left) << ',' << fmt(left + width) << ',' << fmt(centre) << ',' << fmt(density)
               << ',' << fmt(gauss);
            if (nig) os << ',' << fmt(nig_pdf(centre, p.nig[i]));
            os << '\n';
        }
    }
    return os.str();
}

void cmd_estimate(Context& ctx) {
    if (ctx.label == "stressed") throw ConfigError("estimate supports --family gaussian or nig");
    const SeriesPanel panel = load_panel(ctx.cfg);
    ctx.log << "estimate: " << panel.size() << " observations from " << ctx.cfg.input_path;
    if (!panel.floored_rows.empty()) ctx.log << " (" << panel.floored_rows.size() << " deposit rates floored)";
    ctx.log << '\n';
    const FitResult fit_result = fit(panel, ctx.cfg.estimation);

    ParamsFile pf;
    pf.meta = ctx.meta;
    pf.label = ctx.label;
    pf.params = fit_result.params;
    pf.loglik = fit_result.loglik;
    pf.observations = panel.size();
    pf.last_state = panel.states.back();
    pf.last_date = panel.dates.back();
    pf.floored_rows = panel.floored_rows;

    std::ostringstream res;
    res << header(ctx) << "date,eps1,eps2,eps3\n";
    for (std::size_t k = 0; k < fit_result.residuals.size(); ++k) {
        const Vec3& e = fit_result.residuals[k];
        res << panel.dates[k + 1] << ',' << fmt(e[0]) << ',' << fmt(e[1]) << ',' << fmt(e[2]) << '\n';
    }

    ArtifactSet out(ctx.cfg.output_dir);
    out.add("params_" + ctx.label + ".json", params_to_json(pf));
    out.add("residuals_" + ctx.label + ".csv", res.str());
    out.add("residual_hist_" + ctx.label + ".csv", residual_histogram(ctx, fit_result.params, fit_result.residuals));
    for (const auto& path : out.commit()) ctx.log << "  wrote " << path << '\n';
    ctx.log << "  loglik " << fmt(fit_result.loglik) << '\n';
}

void cmd_simulate(Context& ctx) {
    const ParamsFile pf = load_params(ctx, ctx.label);
    SimSpec spec;
    spec.params = pf.params;
    spec.x0 = pf.last_state;
    spec.n_paths = ctx.cfg.n_paths;
    spec.horizon_steps = ctx.cfg.horizon;
    spec.seed = ctx.cfg.seed;
    spec.log_transform = {false, ctx.cfg.rate_transform == RateTransform::Log, true};
    spec.storage = ctx.cfg.storage;
    spec.threads = ctx.cfg.threads;
    ctx.log << "simulate: " << spec.n_paths << " paths x " << spec.horizon_steps << " steps (" << ctx.label
            << ") from " << pf.last_date << '\n';
    const PathEnsemble ens = simulate(spec);
    if (!ens.diagnostics().stationary) ctx.log << "  warning: " << ens.diagnostics().message << '\n';

    const bool full = ens.storage() == StateStorage::Full;
    const std::vector<double> probs = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};
    std::ostringstream sum;
    sum << header(ctx);
    if (!ens.diagnostics().stationary) sum << "# diagnostic: " << ens.diagnostics().message << '\n';
    sum << "step,mean_volume,sd_volume,p01,p05,p25,p50,p75,p95,p99";
    if (full) sum << ",mean_market_rate,mean_deposit_rate";
    sum << '\n';
    for (std::size_t k = 0; k < ens.steps(); ++k) {
        const auto d = ens.volumes_at(k);
        double mean = 0.0, sq = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(d.size());
        for (double v : d) sq += (v - mean) * (v - mean);
        const double sd = d.size() > 1 ? std::sqrt(sq / static_cast<double>(d.size() - 1)) : 0.0;
        sum << k << ',' << fmt(mean) << ',' << fmt(sd);
        for (double q : probs) sum << ',' << fmt(empirical_quantile(d, q));
        if (full) {
            double r1 = 0.0, r2 = 0.0;
            for (std::size_t p = 0; p < ens.n_paths(); ++p) {
                r1 += ens.level(p, k, 0);
                r2 += ens.level(p, k, 1);
            }
            sum << ',' << fmt(r1 / static_cast<double>(ens.n_paths())) << ','
                << fmt(r2 / static_cast<double>(ens.n_paths()));
        }
        sum << '\n';
    }

    ArtifactSet out(ctx.cfg.output_dir);
    out.add("ensemble_" + ctx.label + ".bin", encode_ensemble(ens, ctx.meta));
    out.add("ensemble_summary_" + ctx.label + ".csv", sum.str());
    for (const auto& path : out.commit()) ctx.log << "  wrote " << path << '\n';
}

std::string alpha_tag(double a) {
    std::ostringstream os;
    os << std::setprecision(6) << a * 100.0;
    std::string s = os.str();
    for (char& c : s)
        if (c == '.') c = '_';
    return s;
}

void cmd_risk(Context& ctx) {
    const std::string path = require_artifact(ctx, "ensemble_" + ctx.label + ".bin", "simulate --family " + ctx.label);
    auto [ens, meta] = decode_ensemble(read_file(path), path);
    if (meta.config_hash != ctx.meta.config_hash)
        throw DataError(path + " was produced with config hash " + meta.config_hash + ", current config hash is " +
                        ctx.meta.config_hash + "; rerun 'simulate'");
    ctx.log << "risk: " << ens.n_paths() << " paths x " << ens.horizon() << " steps (" << ctx.label << ")\n";

    const RiskReport r = risk_report(ens, {ctx.cfg.alphas, ctx.cfg.es_alpha});
    std::ostringstream fan;
    fan << header(ctx) << "step,expected";
    for (double a : r.alphas) fan << ",var_" << alpha_tag(a);
    fan << ",es_" << alpha_tag(r.es_alpha);
    for (double a : r.alphas) fan << ",tsl_" << alpha_tag(a);
    fan << ",tsl_es_" << alpha_tag(r.es_alpha) << '\n';
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
        fan << k << ',' << fmt(r.expected[k]);
        for (const auto& v : r.var) fan << ',' << fmt(v[k]);
        fan << ',' << fmt(r.es[k]);
        for (const auto& t : r.tsl) fan << ',' << fmt(t[k]);
        fan << ',' << fmt(r.tsl_es[k]) << '\n';
    }

    std::vector<std::size_t> steps;
    for (std::size_t s : kTslTableSteps)
        if (s <= ens.horizon()) steps.push_back(s);
    std::ostringstream table;
    table << header(ctx) << "horizon_years,step,var95,var99,es975\n";
    for (const auto& row : tsl_table(ens, steps))
        table << row.step / 12 << ',' << row.step << ',' << fmt(row.var95) << ',' << fmt(row.var99) << ','
              << fmt(row.es975) << '\n';

    ArtifactSet out(ctx.cfg.output_dir);
    out.add("fan_chart_" + ctx.label + ".csv", fan.str());
    out.add("tsl_table_" + ctx.label + ".csv", table.str());
    for (const auto& p : out.commit()) ctx.log << "  wrote " << p << '\n';
}

json law_json(const NigParams& n) {
    return {{"alpha", n.alpha}, {"beta", n.beta}, {"delta", n.delta}, {"mu", n.mu}, {"gamma", n.gamma()}};
}

void cmd_stress(Context& ctx) {
    const ParamsFile calibrated = load_params(ctx, "nig");
    const SeriesPanel panel = load_panel(ctx.cfg);
    const StressTarget& target = ctx.cfg.stress;
    ctx.log << "stress: target RDO-bar " << target.outflow_fraction << " at alpha " << target.alpha << ", h "
            << target.horizon_steps << " steps, " << target.mc_paths << " paths per conditional simulation\n";
    const StressResult res = stress_calibrate(calibrated.params, panel, target, ctx.cfg.seed, ctx.cfg.threads);
    ctx.log << "  achieved RDO-bar " << fmt(res.achieved_rdo_bar) << " (calibrated " << fmt(res.calibrated_rdo_bar)
            << ") after " << res.trace.size() << " evaluations\n";

    json j;
    j["meta"] = {{"tool_version", ctx.meta.tool_version}, {"seed", ctx.meta.seed}, {"config_hash", ctx.meta.config_hash}};
    j["target"] = {{"outflow_fraction", target.outflow_fraction},
                   {"alpha", target.alpha},
                   {"horizon_steps", target.horizon_steps},
                   {"mc_paths", target.mc_paths},
                   {"confirm_paths", target.confirm_paths},
                   {"tolerance", target.tolerance}};
    j["calibrated_law"] = law_json(calibrated.params.nig[2]);
    j["stressed_law"] = law_json(res.stressed);
    j["calibrated_rdo_bar"] = res.calibrated_rdo_bar;
    j["achieved_rdo_bar"] = res.achieved_rdo_bar;
    j["within_tolerance"] = std::abs(res.achieved_rdo_bar - target.outflow_fraction) <= target.tolerance;
    j["step_moments"] = {{"mean", res.step_moments.mean},
                         {"sd", std::sqrt(res.step_moments.variance)},
                         {"skewness", res.step_moments.skewness},
                         {"excess_kurtosis", res.step_moments.excess_kurtosis}};
    j["annual_moments"] = {{"skewness", res.annual.skewness}, {"excess_kurtosis", res.annual.excess_kurtosis}};
    json trace = json::array();
    for (const auto& t : res.trace) trace.push_back({{"beta", t.beta}, {"rdo_bar", t.rdo_bar}, {"paths", t.paths}});
    j["trace"] = trace;

    ParamsFile stressed = calibrated;
    stressed.meta = ctx.meta;
    stressed.label = "stressed";
    stressed.params = res.params;
    stressed.loglik = loglik(panel, res.params, false);

    // RDO-bar by model and confidence level
    std::vector<std::pair<std::string, Var1Params>> specs;
    if (fs::exists(out_path(ctx, "params_gaussian.json"))) specs.emplace_back("gaussian", load_params(ctx, "gaussian").params);
    specs.emplace_back("nig", calibrated.params);
    specs.emplace_back("stressed", res.params);
    const RdoOptions opt{target.mc_paths, ctx.cfg.seed, ctx.cfg.threads};
    std::vector<std::vector<double>> cols;
    for (const auto& [name, p] : specs)
        cols.push_back(rdo_bars(p, panel, target.horizon_steps, ctx.cfg.rdo_chart_alphas, opt));
    std::ostringstream chart;
    chart << header(ctx) << "# RDO-bar over " << target.horizon_steps << " steps\nalpha";
    for (const auto& s : specs) chart << ',' << s.first;
    chart << '\n';
    for (std::size_t a = 0; a < ctx.cfg.rdo_chart_alphas.size(); ++a) {
        chart << fmt(ctx.cfg.rdo_chart_alphas[a]);
        for (const auto& c : cols) chart << ',' << fmt(c[a]);
        chart << '\n';
    }

    ArtifactSet out(ctx.cfg.output_dir);
    out.add("stress_result.json", j.dump(2) + "\n");
    out.add("params_stressed.json", params_to_json(stressed));
    out.add("rdo_chart.csv", chart.str());
    for (const auto& p : out.commit()) ctx.log << "  wrote " << p << '\n';
}

// Data rows of one of our CSV artifacts (comment lines dropped).
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    return rows;
}

std::string pct(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << 100.0 * v << '%';
    return os.str();
}

std::string short_num(const std::string& field) {
    std::ostringstream os;
    os << std::setprecision(6) << std::stod(field);
    return os.str();
}

void write_matrix(std::ostream& os, const char* name, const Mat3& m) {
    os << "  " << name << '\n';
    for (std::size_t i = 0; i < 3; ++i) {
        os << "   ";
        for (std::size_t j = 0; j <= i; ++j) os << ' ' << std::setw(14) << m(i, j);
        os << '\n';
    }
}

void cmd_report(Context& ctx) {
    std::ostringstream os;
    os << "nmd report\n" << "tool version " << ctx.meta.tool_version << ", seed " << ctx.meta.seed
       << ", config hash " << ctx.meta.config_hash << "\ninput " << ctx.cfg.input << "\n\n";
    os << std::setprecision(6);
    bool any = false;
    for (const std::string label : {"gaussian", "nig", "stressed"}) {
        const std::string path = out_path(ctx, "params_" + label + ".json");
        if (!fs::exists(path)) continue;
        any = true;
        const ParamsFile pf = params_from_json(read_file(path), path);
        const Var1Params& p = pf.params;
        os << "== parameters (" << label << ") ==\n";
        os << "  observations " << pf.observations << ", last date " << pf.last_date << ", loglik " << pf.loglik
           << '\n';
        if (!pf.floored_rows.empty()) os << "  floored deposit-rate rows " << pf.floored_rows.size() << '\n';
        os << "  a      " << p.a[0] << ' ' << p.a[1] << ' ' << p.a[2] << '\n';
        write_matrix(os, "B", p.B);
        write_matrix(os, "S", p.S);
        os << "  sigma  " << p.sigma[0] << ' ' << p.sigma[1] << ' ' << p.sigma[2] << '\n';
        try {
            const OuDrift ou = var1_to_ou(p.a, p.B, p.dt);
            os << "  theta  " << ou.theta[0] << ' ' << ou.theta[1] << ' ' << ou.theta[2] << '\n';
            write_matrix(os, "K", ou.K);
        } catch (const NonStationaryError& e) {
            os << "  (K, theta) unavailable: " << e.what() << '\n';
        }
        if (p.family == NoiseFamily::Nig) {
            os << "  NIG laws (alpha, beta, delta, mu | annual skewness, annual excess kurtosis)\n";
            for (std::size_t i = 0; i < 3; ++i) {
                const NigMoments m = nig_moments(p.nig[i]);
                const AnnualMoments am = annualize_moments(m.skewness, m.excess_kurtosis,
                                                           static_cast<int>(std::lround(1.0 / p.dt)));
                os << "    L" << i + 1 << "  " << p.nig[i].alpha << ' ' << p.nig[i].beta << ' ' << p.nig[i].delta << ' '
                   << p.nig[i].mu << " | " << am.skewness << ' ' << am.excess_kurtosis << '\n';
            }
        }
        os << '\n';
    }
    if (!any) throw MissingArtifactError("report needs at least one parameter file in " + ctx.cfg.output_dir +
                                         "; run 'estimate' first");

    bool table_header = false;
    for (const std::string label : {"gaussian", "nig", "stressed"}) {
        const std::string path = out_path(ctx, "tsl_table_" + label + ".csv");
        if (!fs::exists(path)) continue;
        if (!table_header) {
            os << "== term structure of liquidity (VaR95, VaR99, ES97.5 of M(t)/D(0)) ==\n";
            table_header = true;
        }
        os << "  " << label << '\n';
        const auto rows = read_csv_rows(path);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != 5) continue;
            os << "    " << std::setw(3) << rows[r][0] << "y  " << std::setw(7) << pct(std::stod(rows[r][2])) << ' '
               << std::setw(7) << pct(std::stod(rows[r][3])) << ' ' << std::setw(7) << pct(std::stod(rows[r][4]))
               << '\n';
        }
    }
    if (table_header) os << '\n';

    const std::string stress_path = out_path(ctx, "stress_result.json");
    if (fs::exists(stress_path)) {
        const json s = json::parse(read_file(stress_path));
        os << "== stress calibration ==\n";
        os << "  target RDO-bar " << pct(s["target"]["outflow_fraction"].get<double>()) << " at alpha "
           << s["target"]["alpha"].get<double>() << ", horizon " << s["target"]["horizon_steps"].get<int>()
           << " steps\n";
        os << "  calibrated RDO-bar " << pct(s["calibrated_rdo_bar"].get<double>()) << ", achieved "
           << pct(s["achieved_rdo_bar"].get<double>()) << '\n';
        const json& law = s["stressed_law"];
        os << "  stressed law alpha " << law["alpha"].get<double>() << ", beta " << law["beta"].get<double>()
           << ", delta " << law["delta"].get<double>() << ", mu " << law["mu"].get<double>() << '\n';
        os << "  annual skewness " << s["annual_moments"]["skewness"].get<double>() << ", annual excess kurtosis "
           << s["annual_moments"]["excess_kurtosis"].get<double>() << "\n\n";
    }
    const std::string chart_path = out_path(ctx, "rdo_chart.csv");
    if (fs::exists(chart_path)) {
        os << "== RDO-bar by confidence level ==\n";
        const auto rows = read_csv_rows(chart_path);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            os << "   ";
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                const std::string& f = rows[r][c];
                os << ' ' << std::setw(10) << (r == 0 ? f : c > 0 ? pct(std::stod(f)) : short_num(f));
            }
            os << '\n';
        }
    }

    ArtifactSet out(ctx.cfg.output_dir);
    out.add("report.txt", os.str());
    for (const auto& p : out.commit()) ctx.log << "report: wrote " << p << '\n';
}

}  // namespace

int run_command(const std::string& command, const std::string& config_path, const CliOverrides& overrides,
                std::ostream& log, std::ostream& err) {
    try {
        Context ctx = make_context(command, config_path, overrides, log);
        if (command == "estimate")
            cmd_estimate(ctx);
        else if (command == "simulate")
            cmd_simulate(ctx);
        else if (command == "risk")
            cmd_risk(ctx);
        else if (command == "stress")
            cmd_stress(ctx);
        else if (command == "report")
            cmd_report(ctx);
        else
            throw ConfigError("unknown command '" + command + "'");
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const SingularMatrixError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitOther;
    }
}

}  // namespace nmd
