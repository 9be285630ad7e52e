#include "umdlab/recipes.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>

namespace umdlab {

using json = nlohmann::json;

Tier tier_from_string(const std::string& s) {
    if (s == "smoke") return Tier::Smoke;
    if (s == "full") return Tier::Full;
    throw std::invalid_argument("unknown tier '" + s + "' (expected smoke or full)");
}

const char* to_string(Tier t) { return t == Tier::Smoke ? "smoke" : "full"; }

std::vector<Recipe> load_recipes(const std::filesystem::path& manifest) {
    std::ifstream is(manifest);
    if (!is) throw std::runtime_error("cannot read recipe manifest " + manifest.string());
    const json j = json::parse(is);
    std::vector<Recipe> out;
    for (const auto& e : j.at("recipes")) {
        Recipe r;
        r.name = e.at("name").get<std::string>();
        r.criterion = e.value("criterion", 0);
        r.config = e.at("config").get<std::string>();
        r.tier = tier_from_string(e.value("tier", std::string("smoke")));
        r.expected = e.value("expected", std::vector<std::string>{});
        r.max_seconds = e.value("max_seconds", 0.0);
        r.description = e.value("description", std::string());
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::vector<int> capped(std::vector<int> v, int cap) {
    std::vector<int> out;
    std::copy_if(v.begin(), v.end(), std::back_inserter(out), [cap](int x) { return x <= cap; });
    if (out.empty() && !v.empty()) out.push_back(cap);
    return out;
}

bool uses_bellman_grid(const ExperimentConfig& c) {
    if (c.kind == ExperimentKind::BellmanSweep) return true;
    return c.kind == ExperimentKind::PropertySuite &&
           std::find(c.properties.begin(), c.properties.end(), "bellman_fixed_point") != c.properties.end();
}

}  // namespace

ExperimentConfig smoke_capped(const ExperimentConfig& c) {
    ExperimentConfig s = c;
    s.depths = capped(c.depths, kSmokeMaxDepth);
    s.resolutions = capped(c.resolutions, uses_bellman_grid(c) ? kSmokeMaxM : kSmokeMaxN);
    s.restarts = std::min(c.restarts, kSmokeMaxRestarts);
    s.references.clear();
    return s;
}

RecipeOutcome run_recipe(const Recipe& r, const std::filesystem::path& manifest_dir, Tier tier) {
    RecipeOutcome out;
    out.name = r.name;
    out.criterion = r.criterion;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto configs = load_configs(manifest_dir / r.config);
        if (tier == Tier::Smoke)
            for (auto& c : configs) c = smoke_capped(c);
        out.report = run_batch(configs);
    } catch (const std::exception& e) {
        out.problems.push_back(std::string("error: ") + e.what());
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.problems.empty()) {
        for (const auto& f : out.report.failures()) out.problems.push_back("FAIL " + f);
        const std::string prefix = kVerdictPrefix;
        for (const auto& name : r.expected) {
            const bool present = std::any_of(out.report.rows.begin(), out.report.rows.end(),
                                             [&](const ReportRow& row) { return row.quantity == prefix + name; });
            if (!present) out.problems.push_back("missing verdict " + name);
        }
        if (tier == Tier::Full && r.max_seconds > 0.0 && out.seconds > r.max_seconds)
            out.problems.push_back("over budget: " + std::to_string(out.seconds) + " s > " +
                                   std::to_string(r.max_seconds) + " s");
    }
    out.pass = out.problems.empty();
    return out;
}

std::vector<RecipeOutcome> run_recipes(const std::filesystem::path& manifest, Tier tier) {
    const auto recipes = load_recipes(manifest);
    const auto dir = manifest.parent_path();
    std::vector<RecipeOutcome> out;
    for (const auto& r : recipes) out.push_back(run_recipe(r, dir, tier));
    return out;
}

}  // namespace umdlab
