// lacuna: command-line front end. Data commands write CSV tables, experiment
// commands write flat JSON reports. Identical arguments give identical bytes.

#include "lacuna/lacuna.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <functional>
#include <sstream>
#include <string>

using namespace lacuna;
using nlohmann::json;

namespace {

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
};

/// Smallest truncation whose validity window contains n, plus a guard level.
RationalTruncation truncation_for(const PartialQuotientSpec& spec, const BigInt& n, std::size_t level = 0) {
    if (level > 0) return RationalTruncation(spec, level);
    std::size_t m = 4;
    for (;;) {
        RationalTruncation t(spec, m);
        if (t.window() > n) return RationalTruncation(spec, m + 1);
        ++m;
    }
}

struct Emitter {
    const Common& common;
    json config;

    std::string hash() const { return config_hash(config); }

    void write(const std::string& text, const std::string& summary) const {
        if (common.out.empty()) {
            std::cout << text;
            std::cerr << summary << "\n";
        } else {
            std::ofstream f(common.out, std::ios::binary);
            if (!f) throw DomainError("cannot open output file '" + common.out + "'");
            f << text;
            std::cout << summary << "\n";
        }
    }

    void table(const Table& t, const std::string& summary) const {
        std::string fmt = common.format.empty() ? "csv" : common.format;
        if (fmt == "csv") {
            std::ostringstream s;
            write_csv(s, t);
            write(s.str(), summary + " [config " + hash() + "]");
        } else {
            json j{{"config", config}, {"config_hash", hash()}, {"version", std::string(version)}, {"rows", to_json(t)}};
            write(j.dump(2) + "\n", summary + " [config " + hash() + "]");
        }
    }

    void report(ExperimentReport r, const std::string& summary) const {
        r.extra["config_hash"] = hash();
        json j = to_json(r);
        std::string fmt = common.format.empty() ? "json" : common.format;
        if (fmt == "json") {
            write(j.dump(2) + "\n", summary);
            return;
        }
        Table t{{"key", "value"}, {}};
        for (const auto& [k, v] : j.items()) t.add({k, v.is_string() ? v.get<std::string>() : v.dump()});
        std::ostringstream s;
        write_csv(s, t);
        write(s.str(), summary);
    }
};

std::string verdict(const ExperimentReport& r) { return r.pass ? "PASS" : "FAIL"; }

struct DesignedPlan {
    SubsequencePlan plan;
    RationalTruncation trunc;
};

DesignedPlan design_plan(const std::string& kind, double beta, std::size_t terms, const std::string& alpha) {
    if (kind == "growth") {
        auto spec = alpha.empty() ? PartialQuotientSpec::growth(beta, 3) : parse_alpha_spec(alpha);
        auto plan = plan_growth(spec, beta, terms);
        return {plan, design_alpha(spec, plan.max_index() + 2, 2).trunc};
    }
    if (kind == "parity") {
        auto spec = alpha.empty() ? parity_rule(beta, terms) : parse_alpha_spec(alpha);
        auto plan = plan_parity(spec, beta, terms);
        return {plan, design_alpha(spec, plan.max_index() + 2, 2).trunc};
    }
    throw DomainError("plan kind must be 'growth' or 'parity'");
}

Sampler make_sampler(const std::string& kind, std::size_t count, std::uint64_t seed) {
    Sampler s;
    s.count = count;
    s.seed = seed;
    if (kind == "grid") s.kind = Sampler::Kind::grid;
    else if (kind != "random") throw DomainError("sampler must be 'random' or 'grid'");
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ergodic sums over circle rotations, lacunary CLTs and the rectangular Lorenz gas"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
    app.add_option("--out", common.out, "Output file (default: standard output)");
    app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.set_version_flag("--version", std::string(version));

    std::function<void()> run;

    // cf
    auto* cf = app.add_subcommand("cf", "Partial quotients and convergents");
    std::string cf_rule = "golden";
    std::size_t cf_n = 10;
    cf->add_option("--rule,--alpha", cf_rule, "Alpha spec (golden, sqrt2, e, list:..., growth:..., parity:...)");
    cf->add_option("--n", cf_n, "Last index")->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
    cf->callback([&] {
        run = [&] {
            auto spec = parse_alpha_spec(cf_rule);
            Emitter e{common, {{"command", "cf"}, {"alpha", cf_rule}, {"n", cf_n}, {"seed", common.seed}}};
            Table t{{"n", "a_n", "p_n", "q_n"}, {}};
            auto conv = convergents(spec, cf_n);
            for (const auto& c : conv) {
                std::string a = c.index == 0 ? "0" : std::to_string(spec.a(static_cast<std::size_t>(c.index)));
                t.add({std::to_string(c.index), a, to_string(c.p), to_string(c.q)});
            }
            e.table(t, "cf: " + std::to_string(cf_n + 1) + " convergents of " + cf_rule);
        };
    });

    // ostrowski
    auto* ost = app.add_subcommand("ostrowski", "Ostrowski digits of N");
    std::string ost_alpha = "golden", ost_n = "10";
    std::size_t ost_level = 0;
    ost->add_option("--alpha", ost_alpha, "Alpha spec");
    ost->add_option("--N", ost_n, "Integer N >= 0 (decimal)");
    ost->add_option("--level", ost_level, "Truncation level M (default: automatic)");
    ost->callback([&] {
        run = [&] {
            BigInt n = parse_bigint(ost_n);
            auto t = truncation_for(parse_alpha_spec(ost_alpha), n, ost_level);
            Emitter e{common,
                      {{"command", "ostrowski"}, {"alpha", ost_alpha}, {"N", ost_n}, {"level", t.level()}, {"seed", common.seed}}};
            auto d = ostrowski_digits(n, t);
            Table tab{{"k", "b_k", "q_k", "partial_sum"}, {}};
            for (std::size_t k = 0; k < d.digits.size(); ++k) {
                tab.add({std::to_string(k), to_string(d.digits[k]), to_string(t.q(k)), to_string(d.partial_sums[k])});
            }
            e.table(tab, "ostrowski: digit sum " + to_string(d.digit_sum()));
        };
    });

    // sum
    auto* sum = app.add_subcommand("sum", "S_N f(x) on a grid of x");
    std::string sum_alpha = "golden", sum_obs = "phi0", sum_n = "1000";
    std::size_t sum_grid = 100, sum_level = 0;
    sum->add_option("--alpha", sum_alpha, "Alpha spec");
    sum->add_option("--observable", sum_obs, "Observable (phi0, indicator:beta=1/3, half, ...)");
    sum->add_option("--N", sum_n, "Orbit length (decimal)");
    sum->add_option("--grid", sum_grid, "Grid size G; x = (i + 1/2) / G")->check(CLI::Range(std::size_t{1}, std::size_t{10'000'000}));
    sum->add_option("--level", sum_level, "Truncation level M (default: automatic)");
    sum->callback([&] {
        run = [&] {
            BigInt n = parse_bigint(sum_n);
            auto t = truncation_for(parse_alpha_spec(sum_alpha), n, sum_level);
            auto f = parse_observable(sum_obs);
            Emitter e{common, {{"command", "sum"}, {"alpha", sum_alpha}, {"observable", sum_obs}, {"N", sum_n},
                               {"grid", sum_grid}, {"level", t.level()}, {"seed", common.seed}}};
            Table tab{{"x", "S_N", "S_N_exact"}, {}};
            for (std::size_t i = 0; i < sum_grid; ++i) {
                Rational x = ratio(2 * static_cast<long>(i) + 1, 2 * static_cast<long>(sum_grid));
                Rational v = ergodic_sum(f, x, n, t).value;
                tab.add({to_string(x), format_double(v.get_d()), to_string(v)});
            }
            e.table(tab, "sum: " + std::to_string(sum_grid) + " grid points, N = " + sum_n);
        };
    });

    // variance
    auto* var = app.add_subcommand("variance", "||f_n||^2, its Cesaro mean and the bound series");
    std::string var_alpha = "golden", var_obs = "phi0";
    long var_nmax = 1000;
    std::size_t var_level = 0;
    var->add_option("--alpha", var_alpha, "Alpha spec");
    var->add_option("--observable", var_obs, "Observable");
    var->add_option("--nmax", var_nmax, "Largest n")->check(CLI::Range(1L, 1'000'000L));
    var->add_option("--level", var_level, "Truncation level M (default: automatic)");
    var->callback([&] {
        run = [&] {
            auto t = truncation_for(parse_alpha_spec(var_alpha), BigInt(var_nmax), var_level);
            auto f = parse_observable(var_obs);
            Emitter e{common, {{"command", "variance"}, {"alpha", var_alpha}, {"observable", var_obs},
                               {"nmax", var_nmax}, {"level", t.level()}, {"seed", common.seed}}};
            Table tab{{"n", "norm_sq", "mean_variance", "lower_series", "upper_series"}, {}};
            for (const auto& r : variance_profile(f, var_nmax, t)) {
                tab.add({std::to_string(r.n), format_double(r.norm_sq), format_double(r.mean_variance),
                         format_double(r.lower_series), format_double(r.upper_series)});
            }
            e.table(tab, "variance: n <= " + std::to_string(var_nmax));
        };
    });

    // plan
    auto* pl = app.add_subcommand("plan", "Subsequence plan t_k, q_{t_k}, L_k");
    std::string pl_kind = "growth", pl_alpha;
    double pl_beta = 2.0;
    std::size_t pl_terms = 20;
    pl->add_option("--kind", pl_kind, "growth or parity")->check(CLI::IsMember({"growth", "parity"}));
    pl->add_option("--alpha", pl_alpha, "Alpha spec (default: designed for the kind)");
    pl->add_option("--beta", pl_beta, "Growth exponent beta > 1");
    pl->add_option("--terms", pl_terms, "Number of terms")->check(CLI::Range(std::size_t{1}, std::size_t{10'000}));
    pl->callback([&] {
        run = [&] {
            auto d = design_plan(pl_kind, pl_beta, pl_terms, pl_alpha);
            Emitter e{common, {{"command", "plan"}, {"kind", pl_kind}, {"alpha", pl_alpha}, {"beta", pl_beta},
                               {"terms", pl_terms}, {"seed", common.seed}}};
            if (common.format == "json") {
                json j = to_json(d.plan);
                j["config_hash"] = e.hash();
                j["version"] = std::string(version);
                e.write(j.dump(2) + "\n", "plan: " + std::to_string(d.plan.size()) + " terms");
                return;
            }
            Table tab{{"k", "t_k", "q_t_k", "L_k"}, {}};
            for (std::size_t k = 0; k < d.plan.size(); ++k) {
                tab.add({std::to_string(k + 1), std::to_string(d.plan.t[k]), to_string(d.plan.q[k]),
                         to_string(d.plan.L[k])});
            }
            e.table(tab, std::string("plan: ") + std::to_string(d.plan.size()) + " terms, lacunary " +
                             (d.plan.lacunary ? "yes" : "no"));
        };
    });

    // clt
    auto* clt = app.add_subcommand("clt", "CLT along the subsequence (JSON report)");
    std::string clt_kind = "growth", clt_alpha, clt_obs = "phi0", clt_sampler = "random", clt_samples_csv;
    double clt_beta = 2.0, clt_ks = 0.03, clt_ratio = 0.1;
    std::size_t clt_terms = 40, clt_samples = 20'000;
    clt->add_option("--kind", clt_kind, "growth or parity")->check(CLI::IsMember({"growth", "parity"}));
    clt->add_option("--alpha", clt_alpha, "Alpha spec (default: designed for the kind)");
    clt->add_option("--beta", clt_beta, "Growth exponent");
    clt->add_option("--terms", clt_terms, "Number of plan terms n");
    clt->add_option("--observable", clt_obs, "Observable");
    clt->add_option("--samples", clt_samples, "Sample count K");
    clt->add_option("--sampler", clt_sampler, "random or grid")->check(CLI::IsMember({"random", "grid"}));
    clt->add_option("--ks-tolerance", clt_ks, "KS tolerance");
    clt->add_option("--ratio-tolerance", clt_ratio, "Variance ratio tolerance");
    clt->add_option("--samples-csv", clt_samples_csv, "Also write the normalized samples to this CSV file");
    clt->callback([&] {
        run = [&] {
            auto d = design_plan(clt_kind, clt_beta, clt_terms, clt_alpha);
            auto f = parse_observable(clt_obs);
            auto s = make_sampler(clt_sampler, clt_samples, common.seed);
            Emitter e{common, {{"command", "clt"}, {"kind", clt_kind}, {"alpha", clt_alpha}, {"beta", clt_beta},
                               {"terms", clt_terms}, {"observable", clt_obs}, {"samples", clt_samples},
                               {"sampler", clt_sampler}, {"ks_tolerance", clt_ks}, {"ratio_tolerance", clt_ratio},
                               {"seed", common.seed}}};
            if (!clt_samples_csv.empty()) {
                auto set = sample_sums(d.plan, f, d.trunc, s, clt_terms);
                Table tab{{"i", "value", "normalized"}, {}};
                for (std::size_t i = 0; i < set.values.size(); ++i) {
                    tab.add({std::to_string(i), format_double(set.values[i]), format_double(set.normalized[i])});
                }
                std::ofstream out(clt_samples_csv, std::ios::binary);
                write_csv(out, tab);
            }
            auto r = clt_experiment(d.plan, f, d.trunc, s, clt_terms, clt_ks, clt_ratio);
            e.report(r, "clt: " + verdict(r) + " KS " + format_double(r.ks) + " variance ratio " +
                            format_double(r.statistic));
        };
    });

    // erdos-fortet
    auto* ef = app.add_subcommand("erdos-fortet", "Lacunary sums with n_k = 2^k - 1 against the Gaussian mixture");
    std::size_t ef_n = 500, ef_samples = 10'000;
    double ef_ks = 0.03, ef_sep = 0.02;
    ef->add_option("--n", ef_n, "Number of terms");
    ef->add_option("--samples", ef_samples, "Sample count K");
    ef->add_option("--ks-tolerance", ef_ks, "KS tolerance to the mixture");
    ef->add_option("--separation", ef_sep, "Required excess of the best-normal KS");
    ef->callback([&] {
        run = [&] {
            Emitter e{common, {{"command", "erdos-fortet"}, {"n", ef_n}, {"samples", ef_samples},
                               {"ks_tolerance", ef_ks}, {"separation", ef_sep}, {"seed", common.seed}}};
            auto r = erdos_fortet_experiment(ef_n, make_sampler("random", ef_samples, common.seed), ef_ks, ef_sep);
            e.report(r, "erdos-fortet: " + verdict(r) + " KS mixture " + format_double(r.ks));
        };
    });

    // gaposhkin
    auto* gp = app.add_subcommand("gaposhkin", "Sparse modification of n_k = 2^k");
    unsigned gp_a = 5;
    std::size_t gp_n = 500, gp_samples = 10'000;
    std::uint64_t gp_count_n = 1'000'000;
    double gp_c = 2.0, gp_ks = 0.02;
    gp->add_option("--a", gp_a, "Exponent a >= 5 of the modified index set");
    gp->add_option("--n", gp_n, "Number of terms");
    gp->add_option("--samples", gp_samples, "Sample count K");
    gp->add_option("--count-n", gp_count_n, "Range for the exact count");
    gp->add_option("--constant", gp_c, "Constant C in the count bound");
    gp->add_option("--ks-tolerance", gp_ks, "KS tolerance");
    gp->callback([&] {
        run = [&] {
            Emitter e{common, {{"command", "gaposhkin"}, {"a", gp_a}, {"n", gp_n}, {"samples", gp_samples},
                               {"count_n", gp_count_n}, {"constant", gp_c}, {"ks_tolerance", gp_ks},
                               {"seed", common.seed}}};
            auto r = gaposhkin_demo(gp_a, gp_n, make_sampler("random", gp_samples, common.seed), gp_count_n, gp_c, gp_ks);
            e.report(r, "gaposhkin: " + verdict(r) + " KS " + format_double(r.ks));
        };
    });

    // billiard
    auto* bl = app.add_subcommand("billiard", "Ray-traced path events of the Lorenz gas");
    std::string bl_a = "3/10", bl_b = "9/20", bl_x;
    std::size_t bl_collisions = 20;
    bl->add_option("--a", bl_a, "Obstacle width (rational)");
    bl->add_option("--b", bl_b, "Obstacle height (rational)");
    bl->add_option("--collisions", bl_collisions, "Number of collisions");
    bl->add_option("--x", bl_x, "Start coordinate in [0, 1) (default: drawn from the seed)");
    bl->callback([&] {
        run = [&] {
            ObstacleParams p{parse_rational(bl_a), parse_rational(bl_b)};
            p.validate();
            Rational x = bl_x.empty() ? sample_point(make_sampler("random", 1, common.seed), 0) : parse_rational(bl_x);
            Emitter e{common, {{"command", "billiard"}, {"a", bl_a}, {"b", bl_b}, {"collisions", bl_collisions},
                               {"x", to_string(x)}, {"seed", common.seed}}};
            auto events = ray_trace(x, p, bl_collisions);
            Table tab{{"t", "x", "y", "cell_i", "cell_j"}, {}};
            for (const auto& ev : events) {
                tab.add({format_double(ev.time), format_double(ev.x), format_double(ev.y), std::to_string(ev.cell_i),
                         std::to_string(ev.cell_j)});
            }
            e.table(tab, "billiard: " + std::to_string(events.size()) + " collisions from x = " + to_string(x) +
                             ", mean hitting time " + format_double(mean_hitting_time(p)));
        };
    });

    // billiard-clt
    auto* bc = app.add_subcommand("billiard-clt", "Cell CLT of the Lorenz gas along a parity plan (JSON report)");
    double bc_beta = 2.0;
    std::size_t bc_terms = 40, bc_samples = 20'000, bc_drift = 2'000;
    std::string bc_scale = "4/5";
    bc->add_option("--beta", bc_beta, "Growth exponent");
    bc->add_option("--terms", bc_terms, "Number of plan terms n");
    bc->add_option("--scale", bc_scale, "a + b (rational, at most 1)");
    bc->add_option("--samples", bc_samples, "Sample count K for the covariance");
    bc->add_option("--drift-samples", bc_drift, "Sample count for the hitting-time variance");
    bc->callback([&] {
        run = [&] {
            auto d = design_plan("parity", bc_beta, bc_terms, "");
            auto params = ObstacleParams::from_alpha(d.trunc.value(), parse_rational(bc_scale));
            Emitter e{common, {{"command", "billiard-clt"}, {"beta", bc_beta}, {"terms", bc_terms},
                               {"scale", bc_scale}, {"samples", bc_samples}, {"drift_samples", bc_drift},
                               {"seed", common.seed}}};
            std::vector<std::size_t> drift_terms;
            for (std::size_t n : {bc_terms / 4, bc_terms / 2, bc_terms}) {
                if (n > 0 && (drift_terms.empty() || drift_terms.back() != n)) drift_terms.push_back(n);
            }
            auto r = billiard_clt_experiment(params, d.plan, d.trunc, make_sampler("random", bc_samples, common.seed),
                                             bc_terms, make_sampler("random", bc_drift, common.seed + 1), drift_terms);
            e.report(r, "billiard-clt: " + verdict(r) + " worst directional error " + format_double(r.statistic));
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }
    try {
        run();
    } catch (const PrecisionError& err) {
        std::cerr << "precision error: " << err.what() << " (required level M >= " << err.required_level() << ")\n";
        return 3;
    } catch (const SingularOrbit& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
