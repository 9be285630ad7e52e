#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "umdlab/harness.hpp"

namespace umdlab {

enum class Tier { Smoke, Full };

Tier tier_from_string(const std::string& s);  // throws std::invalid_argument
const char* to_string(Tier t);

// Manifest entry. `tier` is the recipe's native budget: smoke recipes already
// respect the smoke caps, full ones are capped when run at smoke tier.
struct Recipe {
    std::string name;
    int criterion = 0;
    std::filesystem::path config;  // relative to the manifest
    Tier tier = Tier::Smoke;
    std::vector<std::string> expected;  // verdict names that must PASS
    double max_seconds = 0.0;           // full-tier runtime budget, 0 = none
    std::string description;
};

std::vector<Recipe> load_recipes(const std::filesystem::path& manifest);

inline constexpr int kSmokeMaxDepth = 6;
inline constexpr int kSmokeMaxN = 32;
inline constexpr int kSmokeMaxM = 101;
inline constexpr int kSmokeMaxRestarts = 4;

// depth <= 6, N <= 32, M <= 101, restarts <= 4; frozen references dropped
ExperimentConfig smoke_capped(const ExperimentConfig& c);

struct RecipeOutcome {
    std::string name;
    int criterion = 0;
    bool pass = false;
    double seconds = 0.0;
    std::vector<std::string> problems;
    Report report;
};

RecipeOutcome run_recipe(const Recipe& r, const std::filesystem::path& manifest_dir, Tier tier);
// sequential, in manifest order
std::vector<RecipeOutcome> run_recipes(const std::filesystem::path& manifest, Tier tier);

}  // namespace umdlab
