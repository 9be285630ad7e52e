// umdlab command line: experiments, reports and recipes.
// Exit status: 0 every verdict PASS, 2 some verdict FAIL, 1 error.

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "umdlab/bellman.hpp"
#include "umdlab/harness.hpp"
#include "umdlab/lp_estimator.hpp"
#include "umdlab/martingale.hpp"
#include "umdlab/recipes.hpp"
#include "umdlab/symbol_sets.hpp"

using namespace umdlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
    std::string format = "csv";
    bool no_timing = false;
    bool no_cache = false;
};

// "x", "x:y" (re:im) or a JSON array of numbers / [re, im] pairs
std::vector<Scalar> parse_points(const std::vector<std::string>& items) {
    std::vector<Scalar> out;
    for (const auto& s : items) {
        if (!s.empty() && s.front() == '[') {
            for (const auto& z : json::parse(s)) {
                if (z.is_number())
                    out.emplace_back(z.get<double>());
                else
                    out.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
            }
            continue;
        }
        const auto colon = s.find(':');
        try {
            if (colon == std::string::npos)
                out.emplace_back(std::stod(s));
            else
                out.emplace_back(std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1)));
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot read point '" + s + "' (use x or re:im)");
        }
    }
    if (out.empty()) throw std::invalid_argument("empty point set");
    return out;
}

SpaceSpec parse_space(int dim, const std::string& q) {
    return SpaceSpec(dim, q == "inf" ? kInf : std::stod(q));
}

int exit_code(const Report& r) {
    const auto fails = r.failures();
    for (const auto& f : fails) std::cerr << "FAIL " << f << "\n";
    std::size_t verdicts = 0;
    for (const auto& row : r.rows)
        if (row.quantity.rfind(kVerdictPrefix, 0) == 0) ++verdicts;
    std::cerr << verdicts - fails.size() << "/" << verdicts << " verdicts pass\n";
    return fails.empty() ? 0 : 2;
}

void output(const Globals& g, const Report& r, const std::string& name) {
    if (g.out.empty()) {
        if (g.format == "json")
            write_json(r, std::cout);
        else
            write_csv(r, std::cout);
        return;
    }
    const auto file = fs::path(g.out) / (name + "." + g.format);
    emit(r, file, g.format);
    std::cerr << "wrote " << file.string() << "\n";
}

// Runs configs one at a time through the cache under <out>/cache.
Report run_cached(const Globals& g, std::vector<ExperimentConfig> cs) {
    Report total;
    const bool cache = !g.out.empty() && !g.no_cache;
    const fs::path dir = fs::path(g.out) / "cache";
    std::vector<ExperimentConfig> todo;
    std::vector<std::optional<Report>> hits(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (g.seed) cs[i].seed = *g.seed;
        if (!g.out.empty() && cs[i].output_dir.empty()) cs[i].output_dir = g.out;
        if (cache) hits[i] = cache_lookup(dir, cs[i]);
        if (hits[i])
            std::cerr << "cache hit: " << cs[i].id << "\n";
        else
            todo.push_back(cs[i]);
    }
    const Report fresh = run_batch(todo);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (hits[i]) {
            total.append(*hits[i]);
            continue;
        }
        Report mine;
        while (cursor < fresh.rows.size() && fresh.rows[cursor].experiment_id == cs[i].id)
            mine.rows.push_back(fresh.rows[cursor++]);
        if (cache) cache_store(dir, cs[i], mine);
        total.append(mine);
    }
    return total;
}

std::vector<ExperimentConfig> configs_of_kind(const Globals& g, ExperimentKind kind) {
    auto cs = load_configs(g.config);
    for (const auto& c : cs)
        if (c.kind != kind)
            throw std::invalid_argument("config '" + c.id + "' is a " + to_string(c.kind) + ", expected " +
                                        to_string(kind));
    return cs;
}

// flags shared by the config-building subcommands
struct ExperimentFlags {
    std::vector<std::string> A{"-1", "1"};
    double p = 2.0;
    int d = 2;
    double alpha = 2.0;
    std::vector<int> depths, resolutions;
    int restarts = 8;
    int space_dim = 1;
    std::string q = "2";
    std::string id;

    void add(CLI::App* app, bool with_depths, bool with_resolutions) {
        app->add_option("--A", A, "point set: x or re:im, comma separated")->delimiter(',');
        app->add_option("--p", p, "exponent p > 1");
        app->add_option("--d", d, "torus dimension");
        app->add_option("--alpha", alpha, "PowerQuotient exponent");
        if (with_depths) app->add_option("--depths", depths, "martingale depths")->delimiter(',');
        if (with_resolutions) app->add_option("--resolutions,--N", resolutions, "torus resolutions")->delimiter(',');
        app->add_option("--restarts", restarts);
        app->add_option("--space-dim", space_dim, "dimension n of l^q_n");
        app->add_option("--q", q, "exponent of l^q_n, or inf");
        app->add_option("--id", id, "experiment id");
    }

    ExperimentConfig config(ExperimentKind kind, const std::string& default_id) const {
        ExperimentConfig c;
        c.id = id.empty() ? default_id : id;
        c.kind = kind;
        c.A = parse_points(A);
        c.p = p;
        c.d = d;
        c.alpha = alpha;
        c.depths = depths;
        c.resolutions = resolutions;
        c.restarts = restarts;
        c.space = parse_space(space_dim, q);
        c.validate();
        return c;
    }
};

ReportRow row(const std::string& id, const std::string& quantity, const std::string& method, double value,
              const json& params, double ms) {
    return {id, quantity, method, value, params.dump(), timing_enabled() ? ms : 0.0};
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

SymbolSpec symbol_by_name(const std::string& name) {
    if (fs::exists(name)) {
        std::ifstream is(name);
        std::stringstream ss;
        ss << is.rdbuf();
        return symbol_from_json(ss.str());
    }
    for (const auto& [n, s] : shipped_symbols())
        if (n == name) return s;
    std::string known;
    for (const auto& [n, s] : shipped_symbols()) known += " " + n;
    throw std::invalid_argument("no symbol file or family named '" + name + "'; families:" + known);
}

// split CSV line honouring double quotes
std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                out.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.emplace_back();
        } else {
            out.back() += ch;
        }
    }
    return out;
}

Report read_report(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot read " + file);
    if (fs::path(file).extension() == ".json") return report_from_json(json::parse(is));
    Report r;
    std::string line;
    std::getline(is, line);
    if (line != "experiment_id,quantity,method,value,params_json,wall_ms")
        throw std::runtime_error(file + ": not a report CSV");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = csv_split(line);
        if (f.size() != 6) throw std::runtime_error(file + ": malformed row: " + line);
        r.rows.push_back({f[0], f[1], f[2], std::stod(f[3]), f[4], std::stod(f[5])});
    }
    return r;
}

fs::path default_manifest() {
    if (fs::exists("recipes/recipes.json")) return "recipes/recipes.json";
    return fs::path(UMDLAB_SOURCE_DIR) / "recipes" / "recipes.json";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"umdlab: lower and upper estimates for UMD_p^A constants and Fourier multiplier norms"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "experiment config JSON")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
    app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)");
    app.add_option("--out", g.out, "output directory; stdout when empty");
    app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--no-timing", g.no_timing, "write wall_ms = 0 for byte-identical reruns");
    app.add_flag("--no-cache", g.no_cache, "ignore and do not write <out>/cache");

    auto sub = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->fallthrough();
        return s;
    };

    // beta-estimate
    auto* beta = sub("beta-estimate", "martingale lower bound for one depth");
    std::vector<std::string> beta_A{"-1", "1"};
    double beta_p = 2.0;
    int beta_depth = 4, beta_restarts = 8, beta_dim = 1;
    std::string beta_mode = "level", beta_q = "2";
    beta->add_option("--A", beta_A, "point set: x or re:im, comma separated")->delimiter(',');
    beta->add_option("--p", beta_p);
    beta->add_option("--depth", beta_depth)->check(CLI::Range(1, 16));
    beta->add_option("--restarts", beta_restarts);
    beta->add_option("--mode", beta_mode)->check(CLI::IsMember({"level", "adapted"}));
    beta->add_option("--space-dim", beta_dim);
    beta->add_option("--q", beta_q);

    // bellman
    auto* bell = sub("bellman", "Bellman threshold for real A = {b, B}, or one trial beta");
    double bb = -1.0, bB = 1.0, bp = 2.0, bL = 4.0, bwidth = 1e-2;
    std::vector<int> bM{201};
    std::optional<double> btrial;
    std::string bsurface;
    bell->add_option("--b", bb);
    bell->add_option("--B", bB);
    bell->add_option("--p", bp);
    bell->add_option("--L", bL, "half width of the square");
    bell->add_option("--M", bM, "grid sizes (odd)")->delimiter(',');
    bell->add_option("--width", bwidth, "bisection width");
    bell->add_option("--beta", btrial, "iterate a single trial beta instead of bisecting");
    bell->add_option("--surface", bsurface, "with --beta: write <stem>.csv and <stem>.json");

    // mult-norm
    auto* mult = sub("mult-norm", "torus lower bound for a multiplier norm");
    std::string msym = "PowerQuotient";
    std::vector<int> mN{16};
    double mp = 2.0;
    int mrestarts = 8, mdim = 1;
    std::string mq = "2";
    mult->add_option("--symbol", msym, "symbol JSON file or shipped family name");
    mult->add_option("--N", mN, "resolutions")->delimiter(',');
    mult->add_option("--p", mp);
    mult->add_option("--restarts", mrestarts);
    mult->add_option("--space-dim", mdim);
    mult->add_option("--q", mq);

    ExperimentFlags idf, cef, prf;
    auto* ident = sub("identity-check", "martingale and torus chains against the analytic sandwich");
    idf.add(ident, true, true);
    auto* cex = sub("counterexample", "torus sweep for exp(i |xi|^2 / xi_d^2)");
    cef.add(cex, false, true);
    auto* props = sub("properties", "property suite");
    prf.add(props, true, true);
    std::vector<std::string> prop_names;
    props->add_option("--property", prop_names, "property names (default: symbol-set and martingale invariants)")
        ->delimiter(',');
    bool list_props = false;
    props->add_flag("--list", list_props, "print the registered properties");

    auto* rep = sub("report", "merge and re-emit reports, exit status from their verdicts");
    std::vector<std::string> rep_in;
    std::string rep_name = "report";
    rep->add_option("inputs", rep_in, "report files (.csv or .json)")->required()->check(CLI::ExistingFile);
    rep->add_option("--name", rep_name, "output stem under --out");

    auto* rec = sub("recipes", "shipped reproduction recipes");
    auto* rec_run = rec->add_subcommand("run", "run every recipe");
    rec->require_subcommand(1);
    rec_run->fallthrough();
    std::string tier_name = "smoke";
    std::string manifest;
    std::string only;
    rec_run->add_option("--tier", tier_name, "smoke or full");
    rec_run->add_option("--manifest", manifest, "recipe manifest (default recipes/recipes.json)");
    rec_run->add_option("--only", only, "run a single recipe by name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*seed_opt) g.seed = seed;
        if (g.threads > 0) omp_set_num_threads(g.threads);
        if (g.no_timing) set_timing_enabled(false);

        if (*beta) {
            const SpaceSpec space = parse_space(beta_dim, beta_q);
            const auto A = parse_points(beta_A);
            TreeSearchOptions o;
            o.mode = beta_mode == "adapted" ? PlanMode::Adapted : PlanMode::Level;
            const auto t0 = std::chrono::steady_clock::now();
            const auto est = optimize_tree(convex_hull(PointSet(A)), beta_p, beta_depth, space, beta_restarts,
                                           g.seed.value_or(0), o);
            Report r;
            const std::string id = "beta-estimate";
            r.rows.push_back(row(id, "beta_lower", "martingale", est.value,
                                 {{"depth", beta_depth}, {"p", beta_p}, {"mode", beta_mode},
                                  {"restarts", beta_restarts}, {"seed", g.seed.value_or(0)}},
                                 elapsed_ms(t0)));
            const auto bounds = analytic_bounds(A, space, beta_p);
            if (bounds.upper) {
                r.rows.push_back(row(id, "analytic_upper", "analytic", *bounds.upper, {{"p", beta_p}}, 0.0));
                r.rows.push_back(row(id, std::string(kVerdictPrefix) + "below_analytic_upper", "analytic",
                                     est.value <= *bounds.upper + 1e-6 ? 1.0 : 0.0, {{"slack", 1e-6}}, 0.0));
            }
            if (!g.out.empty()) {
                fs::create_directories(fs::path(g.out) / "witnesses");
                std::ofstream(fs::path(g.out) / "witnesses" / ("beta-estimate-depth" + std::to_string(beta_depth) +
                                                              ".json"))
                    << witness_json(est).dump(1);
            }
            output(g, r, "beta-estimate");
            return exit_code(r);
        }

        if (*bell) {
            if (btrial) {
                BellmanParams bp_;
                bp_.p = bp;
                bp_.b = bb;
                bp_.B = bB;
                bp_.beta = *btrial;
                bp_.half_width = bL;
                bp_.resolution = bM.front();
                BellmanGrid grid(bp_);
                initial_surface(grid);
                const auto t0 = std::chrono::steady_clock::now();
                const auto res = iterate(grid);
                Report r;
                const json params{{"p", bp},        {"b", bb},
                                  {"B", bB},        {"beta", *btrial},
                                  {"L", bL},        {"M", bM.front()},
                                  {"status", to_string(res.status)}, {"iterations", res.iterations}};
                r.rows.push_back(row("bellman", "origin_value", "bellman", res.origin_value, params, elapsed_ms(t0)));
                r.rows.push_back(row("bellman", "sup_change", "bellman", res.last_change, params, 0.0));
                r.rows.push_back(row("bellman", "admissible", "bellman", admissible(res) ? 1.0 : 0.0, params, 0.0));
                if (!bsurface.empty()) {
                    std::ofstream csv(bsurface + ".csv");
                    write_surface_csv(grid, csv);
                    std::ofstream(bsurface + ".json") << surface_metadata_json(grid, res);
                    if (!csv) throw std::runtime_error("cannot write " + bsurface + ".csv");
                }
                output(g, r, "bellman");
                return exit_code(r);
            }
            std::vector<ExperimentConfig> cs;
            if (!g.config.empty()) {
                cs = configs_of_kind(g, ExperimentKind::BellmanSweep);
            } else {
                ExperimentConfig c;
                c.id = "bellman";
                c.kind = ExperimentKind::BellmanSweep;
                c.A = {bb, bB};
                c.p = bp;
                c.resolutions = bM;
                c.half_width = bL;
                c.bisection_width = bwidth;
                c.validate();
                cs.push_back(c);
            }
            const auto r = run_cached(g, cs);
            output(g, r, cs.size() == 1 ? cs[0].id : "bellman");
            return exit_code(r);
        }

        if (*mult) {
            const auto symbol = symbol_by_name(msym);
            const SpaceSpec space = parse_space(mdim, mq);
            Report r;
            std::optional<GridField> warm;
            auto Ns = mN;
            std::sort(Ns.begin(), Ns.end());
            for (int N : Ns) {
                const auto t0 = std::chrono::steady_clock::now();
                const auto op = make_operator(symbol, N, space);
                LpEstimateOptions o;
                o.p = mp;
                o.restarts = mrestarts;
                o.seed = g.seed.value_or(0);
                if (warm && N % warm->N == 0) o.warm_starts.push_back(tile_upsample(*warm, N / warm->N));
                const auto est = norm_lower_bound(op, o);
                const json params{{"symbol", symbol.tag()}, {"N", N}, {"p", mp}, {"restarts", mrestarts}};
                r.rows.push_back(row("mult-norm", "fft_lower", "fft", est.value, params, elapsed_ms(t0)));
                if (!g.out.empty()) {
                    const auto stem = fs::path(g.out) / "witnesses" / ("mult-norm-N" + std::to_string(N));
                    fs::create_directories(stem.parent_path());
                    std::ofstream bin(stem.string() + ".bin", std::ios::binary);
                    write_field_binary(est.witness, bin);
                    std::ofstream(stem.string() + ".json") << field_header_json(est.witness, est.value, mp);
                }
                warm = est.witness;
            }
            output(g, r, "mult-norm");
            return exit_code(r);
        }

        if (*ident || *cex || *props) {
            ExperimentKind kind = *ident ? ExperimentKind::IdentityCheck
                                 : *cex  ? ExperimentKind::CounterexampleSweep
                                         : ExperimentKind::PropertySuite;
            if (list_props) {
                for (const auto& n : property_names()) std::cout << n << "\n";
                return 0;
            }
            std::vector<ExperimentConfig> cs;
            if (!g.config.empty()) {
                cs = configs_of_kind(g, kind);
            } else if (*ident) {
                cs.push_back(idf.config(kind, "identity-check"));
            } else if (*cex) {
                if (cef.resolutions.empty()) cef.resolutions = {16, 32, 64};
                cs.push_back(cef.config(kind, "counterexample"));
            } else {
                auto c = prf.config(kind, "properties");
                c.properties = prop_names;
                c.validate();
                cs.push_back(c);
            }
            const auto r = run_cached(g, cs);
            output(g, r, cs.size() == 1 ? cs[0].id : to_string(kind));
            return exit_code(r);
        }

        if (*rep) {
            Report r;
            for (const auto& f : rep_in) r.append(read_report(f));
            output(g, r, rep_name);
            return exit_code(r);
        }

        if (*rec_run) {
            const Tier tier = tier_from_string(tier_name);
            const fs::path m = manifest.empty() ? default_manifest() : fs::path(manifest);
            auto recipes = load_recipes(m);
            bool all = true;
            int ran = 0;
            double total = 0.0;
            for (const auto& rcp : recipes) {
                if (!only.empty() && rcp.name != only) continue;
                const auto o = run_recipe(rcp, m.parent_path(), tier);
                ++ran;
                total += o.seconds;
                all = all && o.pass;
                std::printf("%s  %-22s criterion %2d  %8.2f s\n", o.pass ? "PASS" : "FAIL", o.name.c_str(),
                            o.criterion, o.seconds);
                for (const auto& p : o.problems) std::printf("      %s\n", p.c_str());
                std::fflush(stdout);
                if (!g.out.empty()) emit(o.report, fs::path(g.out) / to_string(tier) / (o.name + "." + g.format), g.format);
            }
            if (ran == 0) throw std::invalid_argument("no recipe named '" + only + "'");
            std::printf("%s tier: %d recipes, %.1f s, %s\n", to_string(tier), ran, total,
                        all ? "all PASS" : "some FAIL");
            return all ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
