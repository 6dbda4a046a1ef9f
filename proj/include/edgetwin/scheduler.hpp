#pragma once

#include "edgetwin/twin.hpp"
#include "edgetwin/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace edgetwin::sched {

/// Tunable weights of the trainable scorer plus the migration threshold.
/// All components live in [0, 1].
struct WeightVector {
    double w_fit = 0.25;
    double w_latency = 0.25;
    double w_energy = 0.25;
    double w_balance = 0.25;
    double migrate_threshold = 0.2;

    bool operator==(const WeightVector&) const = default;

    /// Lexicographic comparison, used for deterministic tie-breaking.
    auto tie() const { return std::tie(w_fit, w_latency, w_energy, w_balance, migrate_threshold); }
    bool operator<(const WeightVector& o) const { return tie() < o.tie(); }

    bool in_bounds() const {
        auto ok = [](double v) { return v >= 0.0 && v <= 1.0; };
        return ok(w_fit) && ok(w_latency) && ok(w_energy) && ok(w_balance) &&
               ok(migrate_threshold);
    }
};

/// Decision contract: a pure function of (snapshot, config, seed). Decisions
/// may reference anything in the snapshot; the engine validates and rejects.
class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual std::string name() const = 0;
    virtual std::vector<Decision> decide(const TwinState& snapshot) = 0;
};

/// Queued jobs in scheduling order: priority desc, arrival asc, id asc.
std::vector<const JobState*> queued_in_order(const TwinState& snapshot);

/// Working view of free capacities during one decide() call, so that earlier
/// placements in the same invocation reserve capacity for later checks.
class CapacityLedger {
public:
    explicit CapacityLedger(const TwinState& snapshot);

    bool fits(const JobSpec& job, const std::string& node_id) const;
    void place(const JobSpec& job, const std::string& node_id);
    void remove(const JobSpec& job, const std::string& node_id);
    std::int64_t free_cpu(const std::string& node_id) const;
    std::int64_t free_mem(const std::string& node_id) const;
    std::int64_t free_storage(const std::string& node_id) const;

private:
    struct Free {
        std::int64_t cpu, mem, storage;
    };
    std::map<std::string, Free> free_;
    const TwinState* snapshot_;
};

/// True when the node can host the job: up, tier/zone allowed, capacity in
/// the ledger, data source reachable.
bool feasible(const TwinState& snapshot, const CapacityLedger& ledger, const Routing& routing,
              const JobSpec& job, const std::string& node_id);

/// Weighted placement score in [0, 1]. Components: fit (tightness), latency
/// headroom against the bound, marginal energy, post-placement balance.
/// Precondition: node is feasible for the job.
double score_weighted(const TwinState& snapshot, const JobSpec& job, const std::string& node_id,
                      const WeightVector& w);

/// First feasible node in ascending id order; never migrates.
std::vector<Decision> decide_first_fit(const TwinState& snapshot);

/// Feasible node minimizing mean leftover fraction; ties to lowest id.
std::vector<Decision> decide_best_fit(const TwinState& snapshot);

/// Argmax-score placement for queued jobs plus migrations of running jobs
/// whose score improves by more than the threshold.
std::vector<Decision> decide_weighted(const TwinState& snapshot, const WeightVector& w);

class FirstFitScheduler final : public Scheduler {
public:
    std::string name() const override { return "first-fit"; }
    std::vector<Decision> decide(const TwinState& snapshot) override {
        return decide_first_fit(snapshot);
    }
};

class BestFitScheduler final : public Scheduler {
public:
    std::string name() const override { return "best-fit"; }
    std::vector<Decision> decide(const TwinState& snapshot) override {
        return decide_best_fit(snapshot);
    }
};

class WeightedScheduler final : public Scheduler {
public:
    explicit WeightedScheduler(WeightVector w = {}) : weights_(w) {}
    std::string name() const override { return "weighted"; }
    std::vector<Decision> decide(const TwinState& snapshot) override {
        return decide_weighted(snapshot, weights_);
    }
    const WeightVector& weights() const { return weights_; }

private:
    WeightVector weights_;
};

} // namespace edgetwin::sched
