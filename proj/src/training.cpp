#include "edgetwin/training.hpp"

#include "edgetwin/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

namespace edgetwin::training {

double evaluate_candidate(const sched::WeightVector& w,
                          const std::vector<scenario::Scenario>& batch,
                          const engine::Objective& objective,
                          const engine::EngineConfig& engine_config) {
    if (batch.empty()) throw Error("invalid-params", "scenario batch must be nonempty");
    double sum = 0.0;
    for (const auto& s : batch) {
        sched::WeightedScheduler scheduler(w);
        auto result = engine::run(s, scheduler, engine_config);
        sum += engine::fitness(result.report, objective);
    }
    return sum / static_cast<double>(batch.size());
}

sched::WeightVector mutate_weights(const sched::WeightVector& w, double sigma, Rng& rng) {
    if (sigma < 0) throw Error("invalid-params", "sigma must be >= 0");
    auto perturb = [&](double v) { return std::clamp(v + sigma * rng.gaussian(), 0.0, 1.0); };
    sched::WeightVector out;
    out.w_fit = perturb(w.w_fit);
    out.w_latency = perturb(w.w_latency);
    out.w_energy = perturb(w.w_energy);
    out.w_balance = perturb(w.w_balance);
    out.migrate_threshold = perturb(w.migrate_threshold);
    return out;
}

namespace {

struct Candidate {
    sched::WeightVector weights;
    double fitness = 0.0;
    bool evaluated = false;
};

sched::WeightVector random_weights(Rng& rng) {
    sched::WeightVector w;
    w.w_fit = rng.uniform01();
    w.w_latency = rng.uniform01();
    w.w_energy = rng.uniform01();
    w.w_balance = rng.uniform01();
    w.migrate_threshold = rng.uniform01();
    return w;
}

/// Evaluate unevaluated candidates, optionally in parallel. Slot order of
/// results is fixed, so threading never changes the outcome.
void evaluate_all(std::vector<Candidate>& population, const TrainingConfig& config,
                  std::int64_t& evaluations) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < population.size(); ++i)
        if (!population[i].evaluated) todo.push_back(i);
    evaluations += static_cast<std::int64_t>(todo.size());

    unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
    if (threads <= 1 || todo.size() <= 1) {
        for (std::size_t i : todo) {
            population[i].fitness = evaluate_candidate(population[i].weights, config.batch,
                                                       config.objective, config.engine_config);
            population[i].evaluated = true;
        }
        return;
    }
    std::vector<std::future<double>> futures(todo.size());
    for (std::size_t k = 0; k < todo.size(); ++k) {
        const sched::WeightVector w = population[todo[k]].weights;
        futures[k] = std::async(std::launch::async, [w, &config] {
            return evaluate_candidate(w, config.batch, config.objective, config.engine_config);
        });
    }
    for (std::size_t k = 0; k < todo.size(); ++k) {
        population[todo[k]].fitness = futures[k].get();
        population[todo[k]].evaluated = true;
    }
}

GenerationStats stats_of(const std::vector<Candidate>& population) {
    GenerationStats g;
    g.best = population.front().fitness;
    g.worst = population.front().fitness;
    double sum = 0.0;
    for (const Candidate& c : population) {
        g.best = std::max(g.best, c.fitness);
        g.worst = std::min(g.worst, c.fitness);
        sum += c.fitness;
    }
    g.mean = sum / static_cast<double>(population.size());
    return g;
}

} // namespace

TrainingResult train_population(const TrainingConfig& config) {
    if (config.population_size < 1 || config.elite_count < 1 ||
        config.elite_count > config.population_size)
        throw Error("invalid-params", "need 1 <= elite_count <= population_size");
    if (config.generations < 0) throw Error("invalid-params", "generations must be >= 0");
    if (config.sigma0 < 0 || config.sigma_decay < 0)
        throw Error("invalid-params", "sigma parameters must be >= 0");
    if (config.batch.empty()) throw Error("invalid-params", "scenario batch must be nonempty");

    const std::size_t pop_size = static_cast<std::size_t>(config.population_size);
    const std::size_t elites = static_cast<std::size_t>(config.elite_count);

    std::vector<Candidate> population(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) {
        if (i < config.seed_population.size()) {
            if (!config.seed_population[i].in_bounds())
                throw Error("invalid-params", "seed population weights outside [0,1]");
            population[i].weights = config.seed_population[i];
        } else {
            Rng rng(derive_seed(config.seed, "init", i));
            population[i].weights = random_weights(rng);
        }
    }

    TrainingResult result;
    evaluate_all(population, config, result.evaluations);
    result.history.push_back(stats_of(population));

    // Fitness desc; ties broken by lexicographic weight order for a total,
    // arrival-independent order.
    auto by_rank = [](const Candidate& a, const Candidate& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        return a.weights < b.weights;
    };

    double sigma = config.sigma0;
    for (int gen = 1; gen <= config.generations; ++gen) {
        std::sort(population.begin(), population.end(), by_rank);
        std::vector<Candidate> next(population.begin(),
                                    population.begin() + static_cast<std::ptrdiff_t>(elites));
        for (std::size_t slot = elites; slot < pop_size; ++slot) {
            const Candidate& parent = next[(slot - elites) % elites];
            Rng rng(derive_seed(config.seed, "mutate", static_cast<std::uint64_t>(gen), slot));
            Candidate child;
            child.weights = mutate_weights(parent.weights, sigma, rng);
            next.push_back(std::move(child));
        }
        population = std::move(next);
        evaluate_all(population, config, result.evaluations);
        result.history.push_back(stats_of(population));
        sigma *= config.sigma_decay;
    }

    std::sort(population.begin(), population.end(), by_rank);
    result.best = population.front().weights;
    result.best_fitness = population.front().fitness;
    return result;
}

std::string training_result_text(const TrainingResult& result, const TrainingConfig& config) {
    Json j;
    Json best;
    best["w_fit"] = result.best.w_fit;
    best["w_latency"] = result.best.w_latency;
    best["w_energy"] = result.best.w_energy;
    best["w_balance"] = result.best.w_balance;
    best["migrate_threshold"] = result.best.migrate_threshold;
    j["best"] = std::move(best);
    j["best_fitness"] = result.best_fitness;
    Json history = Json::array();
    for (const auto& g : result.history) {
        history.push_back(Json{{"best", g.best}, {"mean", g.mean}, {"worst", g.worst}});
    }
    j["history"] = std::move(history);
    j["evaluations"] = result.evaluations;
    Json cfg;
    cfg["population_size"] = config.population_size;
    cfg["elite_count"] = config.elite_count;
    cfg["generations"] = config.generations;
    cfg["sigma0"] = config.sigma0;
    cfg["sigma_decay"] = config.sigma_decay;
    cfg["seed"] = config.seed;
    Json batch = Json::array();
    for (const auto& s : config.batch) batch.push_back(s.name);
    cfg["batch"] = std::move(batch);
    Json objective;
    objective["alpha"] = config.objective.alpha;
    objective["beta"] = config.objective.beta;
    objective["gamma"] = config.objective.gamma;
    objective["delta"] = config.objective.delta;
    cfg["objective"] = std::move(objective);
    cfg["reschedule_interval_ms"] = config.engine_config.reschedule_interval_ms;
    if (config.engine_config.horizon_ms) cfg["horizon_ms"] = *config.engine_config.horizon_ms;
    j["config"] = std::move(cfg);
    return j.dump(2) + "\n";
}

} // namespace edgetwin::training
