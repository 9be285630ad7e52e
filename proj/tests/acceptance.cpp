// Acceptance run: every shipped recipe at full budget, one PASS/FAIL line per
// criterion. Extra range checks that are not verdicts of the harness itself
// live here.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "umdlab/harness.hpp"
#include "umdlab/recipes.hpp"

using namespace umdlab;
using nlohmann::json;

namespace {

struct Picked {
    double value;
    json params;
    double wall_ms;
};

std::vector<Picked> pick(const Report& r, const std::string& id, const std::string& quantity) {
    std::vector<Picked> out;
    for (const auto& row : r.rows)
        if (row.experiment_id == id && row.quantity == quantity)
            out.push_back({row.value, json::parse(row.params_json), row.wall_ms});
    return out;
}

std::optional<double> at(const Report& r, const std::string& id, const std::string& quantity, const char* key,
                         int v) {
    for (const auto& x : pick(r, id, quantity))
        if (x.params.value(key, -1) == v) return x.value;
    return std::nullopt;
}

double pstar_minus_1(double p) { return std::max(p, p / (p - 1.0)) - 1.0; }

// problems go to `bad`, informational lines to `notes`
using Extra = std::function<void(const Report&, std::vector<std::string>& bad, std::vector<std::string>& notes)>;

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void p2_rows_fast(const Report& r, std::vector<std::string>& bad, std::vector<std::string>& notes) {
    const auto rows = pick(r, "p2-exactness", "p2_lattice_gap");
    if (rows.size() != 2 * shipped_symbols().size()) bad.push_back("expected one row per family and N");
    for (const auto& x : rows)
        if (x.wall_ms >= 10000.0) bad.push_back(x.params.dump() + " took " + std::to_string(x.wall_ms) + " ms");
    double slowest = 0.0;
    for (const auto& x : rows) slowest = std::max(slowest, x.wall_ms);
    notes.push_back(fmt("%zu family/resolution runs, slowest %.0f ms", rows.size(), slowest));
}

void sandwich(const Report& r, std::vector<std::string>& bad, std::vector<std::string>& notes) {
    for (const auto& [id, p] : {std::pair{"sandwich-p4", 4.0}, std::pair{"sandwich-p4over3", 4.0 / 3.0}}) {
        const double hi = pstar_minus_1(p) + 1e-6;
        const auto m = at(r, id, "beta_lower", "depth", 10);
        const auto f = at(r, id, "fft_lower", "N", 64);
        if (!m || !f) {
            bad.push_back(std::string(id) + ": missing depth 10 or N = 64 row");
            continue;
        }
        if (!(*m > 1.0 && *m <= hi)) bad.push_back(std::string(id) + ": martingale " + std::to_string(*m));
        if (!(*f > 1.0 && *f <= hi)) bad.push_back(std::string(id) + ": fft " + std::to_string(*f));
        notes.push_back(fmt("%s: depth 10 -> %.6f, N = 64 -> %.6f, ceiling %.6f", id, *m, *f, hi));
    }
}

void thresholds(const Report& r, std::vector<std::string>& bad, std::vector<std::string>& notes) {
    const struct {
        const char* id;
        double lo, hi;
    } want[] = {{"threshold-p4", 2.55, 3.45}, {"threshold-p2-sym", 0.95, 1.05}, {"threshold-p2-01", 0.95, 1.05}};
    for (const auto& w : want) {
        const auto v = at(r, w.id, "beta_hat", "M", 201);
        if (!v) {
            bad.push_back(std::string(w.id) + ": no M = 201 row");
            continue;
        }
        notes.push_back(fmt("%s: beta_hat %.6f in [%.2f, %.2f]", w.id, *v, w.lo, w.hi));
        if (!(*v >= w.lo && *v <= w.hi)) bad.push_back(std::string(w.id) + ": beta_hat " + std::to_string(*v));
    }
}

void counterexample(const Report& r, std::vector<std::string>& bad, std::vector<std::string>& notes) {
    const auto p4 = pick(r, "counterexample-p4", "fft_lower");
    const auto p2 = pick(r, "counterexample-p2", "fft_lower");
    if (p4.size() != 4 || p2.size() != 4) bad.push_back("expected N = 16, 32, 64, 128 at both exponents");
    std::string line = "p = 4:";
    for (const auto& x : p4) line += fmt(" %.4f", x.value);
    notes.push_back(line);
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path manifest =
        argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path(UMDLAB_RECIPES_DIR) / "recipes.json";
    const std::map<int, std::pair<const char*, Extra>> criteria = {
        {1, {"p = 2 exactness", p2_rows_fast}},
        {2, {"singleton and scaling laws", nullptr}},
        {3, {"known constant sandwich", sandwich}},
        {4, {"Bellman fixed point", nullptr}},
        {5, {"Bellman threshold accuracy", thresholds}},
        {6, {"lifting inequality", nullptr}},
        {7, {"adapted vs level, hull monotonicity", nullptr}},
        {8, {"counterexample sweep", counterexample}},
        {9, {"duality", nullptr}},
        {10, {"symbol identities", nullptr}},
    };

    std::vector<Recipe> recipes;
    try {
        recipes = load_recipes(manifest);
    } catch (const std::exception& e) {
        std::printf("FAIL cannot load recipes: %s\n", e.what());
        return 1;
    }

    int failed = 0;
    for (const auto& [n, what] : criteria) {
        std::vector<const Recipe*> mine;
        for (const auto& r : recipes)
            if (r.criterion == n) mine.push_back(&r);
        std::vector<std::string> bad, notes;
        double seconds = 0.0;
        if (mine.size() != 1) {
            bad.push_back(std::to_string(mine.size()) + " recipes for this criterion");
        } else {
            const auto o = run_recipe(*mine[0], manifest.parent_path(), Tier::Full);
            seconds = o.seconds;
            bad = o.problems;
            if (what.second && o.problems.empty()) what.second(o.report, bad, notes);
        }
        std::printf("%s criterion %2d: %-38s %8.2f s\n", bad.empty() ? "PASS" : "FAIL", n, what.first, seconds);
        for (const auto& b : notes) std::printf("      %s\n", b.c_str());
        for (const auto& b : bad) std::printf("      problem: %s\n", b.c_str());
        std::fflush(stdout);
        failed += bad.empty() ? 0 : 1;
    }
    std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
