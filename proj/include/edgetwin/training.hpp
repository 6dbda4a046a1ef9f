#pragma once

#include "edgetwin/engine.hpp"
#include "edgetwin/rng.hpp"
#include "edgetwin/scenario.hpp"
#include "edgetwin/scheduler.hpp"

#include <cstdint>
#include <vector>

namespace edgetwin::training {

struct TrainingConfig {
    int population_size = 16;
    int elite_count = 4;
    int generations = 0;
    double sigma0 = 0.1;
    double sigma_decay = 0.95;
    std::vector<scenario::Scenario> batch;
    engine::Objective objective;
    engine::EngineConfig engine_config;
    std::uint64_t seed = 0;
    /// Worker threads for candidate evaluation; 0 = hardware concurrency,
    /// 1 = serial. Results are identical either way.
    unsigned threads = 0;
    /// Warm start: these fill the first generation-0 slots (e.g. the best of
    /// an earlier run); the rest are drawn uniformly.
    std::vector<sched::WeightVector> seed_population;
};

struct GenerationStats {
    double best = 0.0;
    double mean = 0.0;
    double worst = 0.0;

    bool operator==(const GenerationStats&) const = default;
};

struct TrainingResult {
    sched::WeightVector best;
    double best_fitness = 0.0;
    std::vector<GenerationStats> history; // length = generations + 1
    std::int64_t evaluations = 0;
};

/// Mean fitness of a weighted scheduler across the scenario batch.
double evaluate_candidate(const sched::WeightVector& w,
                          const std::vector<scenario::Scenario>& batch,
                          const engine::Objective& objective,
                          const engine::EngineConfig& engine_config);

/// Gaussian perturbation of every component (including the migration
/// threshold), clamped to [0, 1].
sched::WeightVector mutate_weights(const sched::WeightVector& w, double sigma, Rng& rng);

/// Elitist (mu + lambda) evolution: evaluate the population, keep the top
/// elites unchanged, refill with mutations of elites round-robin, decay sigma.
TrainingResult train_population(const TrainingConfig& config);

/// JSON document with best weights, history, and the config for replay.
std::string training_result_text(const TrainingResult& result, const TrainingConfig& config);

} // namespace edgetwin::training
