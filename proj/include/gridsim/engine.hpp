#pragma once

#include "gridsim/ingest.hpp"
#include "gridsim/metrics.hpp"
#include "gridsim/model.hpp"
#include "gridsim/params.hpp"
#include "gridsim/scenarios.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridsim {

enum class TransferKind { StageIn, Stream };

struct TransferTask {
    std::uint64_t id = 0;
    Lfn lfn;
    Bytes size = 0;
    SiteId src;
    SiteId dst;
    TransferKind kind = TransferKind::StageIn;
    std::vector<JobId> owners;
    double bytes_done = 0;
    double allocated_rate = 0;
    int attempts = 0;          // failed attempts against the current source
    int max_attempts = 3;
    double quality = 1.0;
    double consumption_rate = 0;   // streams: bytes/s the owning job reads at
    std::set<SiteId> exhausted_sources;
    std::uint64_t draw_key = 0;
    const Link* link = nullptr;   // resolved once by the engine
};

enum class TransferOutcome { InProgress, Completed, FailedAttempt, Exhausted };

struct TransferStep {
    TransferOutcome outcome = TransferOutcome::InProgress;
    double bytes_moved = 0;
    double elapsed = 0;   // seconds of `dt` used; less than dt when the attempt ended early
};

// Uniform draws keyed by (key, attempt) so a transfer's fate does not depend
// on the order in which the engine happens to process it.
class QualityDraws {
public:
    explicit QualityDraws(std::uint64_t seed) : seed_(seed) {}
    double operator()(std::uint64_t key, int attempt) const;

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept;
std::uint64_t hash_string(std::string_view s) noexcept;

// Moves `rate * dt` bytes. When the file is complete the attempt succeeds
// with probability task.quality; a failure restarts from byte zero and the
// max_attempts-th failure exhausts the task.
TransferStep advance_transfer(TransferTask& task, double rate, double dt, const QualityDraws& draws);

struct FlowDemand {
    SiteId src;
    SiteId dst;
    double consumption_cap = 0;   // 0 = uncapped (stage-in)
};

// Rate of one flow sharing `link` with `flows` others (itself included):
// min(per-file cap for the latency, bandwidth / flows, consumption cap).
double flow_rate(const Link& link, const SpeedTable& speed, std::size_t flows, double consumption_cap);

// Per directed link: rate = min(per-file cap, bandwidth / flows on link,
// consumption cap).
std::vector<double> allocate_bandwidth(std::span<const FlowDemand> flows, const Topology& topology,
                                       const SpeedTable& speed);

// Next source for an exhausted task: nearest holder other than the
// destination and sources already given up on.
std::optional<SiteId> fallback_replica(const FileCatalog& catalog, const Topology& topology, const TransferTask& task);

struct Segment {
    Lfn lfn;   // empty for an input-less job
    Bytes size = 0;
    AccessMode mode = AccessMode::Local;
    SiteId src;
    double cpu_share = 0;
    double efficiency = 1;
    double wall_needed = 0;
    double progress = 0;   // wall seconds of wall_needed done
    std::set<SiteId> exhausted_sources;
};

struct RunningJob {
    Job job;
    AccessPlan plan;
    double base_efficiency = 1;
    std::vector<Segment> segments;
    std::size_t current = 0;
    double started_at = 0;
    double stage_in_wait = 0;
    std::vector<std::uint64_t> pending_stage_ins;
    double ready_offset = 0;   // when this slice's compute may begin
    std::optional<std::uint64_t> stream;
    bool failed = false;
    std::string diagnostic;
};

// Builds the compute segments: CPU time split by input size, stream inputs
// at base * (1 - penalty(latency src->site)).
RunningJob start_job(const Job& job, const AccessPlan& plan, const FileCatalog& catalog, const Topology& topology,
                     const PenaltyTable& penalty, double base_efficiency, double now);

// Everything advance_job needs from the engine to drive stream segments.
class StreamPort {
public:
    virtual ~StreamPort() = default;
    // The open stream for the job's current segment, opening one if needed.
    // nullptr means the job cannot proceed and has been marked failed.
    virtual TransferTask* stream_for(RunningJob& job, double offset) = 0;
    // Moves data on the stream for `dt` seconds starting at `offset`.
    virtual TransferStep feed(RunningJob& job, TransferTask& task, double dt, double offset) = 0;
};

struct JobStep {
    bool completed = false;
    double offset = 0;   // completion time within the slice
};

// Runs the job from `from` to `slice_length` seconds into the slice.
JobStep advance_job(RunningJob& job, double from, double slice_length, StreamPort* streams = nullptr);

using EfficiencySampler = std::function<double(const Job&)>;

// Default sampler: per-job generator seeded from (seed, job id).
EfficiencySampler histogram_sampler(EfficiencyHistogram histogram, std::uint64_t seed);

struct EngineConfig {
    double slice_seconds = 100.0;
    int max_attempts = 3;
    SweepConfig sweep;
    SiteId tier1{"FNAL"};
};

class Simulation;
using SliceObserver = std::function<void(const Simulation&)>;

// The time-sliced engine. Owns its state; one instance per run.
class Simulation final : private StreamPort {
public:
    Simulation(Assembly assembly, Scenario scenario, ParamTables tables, EfficiencySampler sampler,
               EngineConfig config = {});

    MetricsLog run(const SliceObserver& observer = {});

    double clock() const noexcept { return clock_; }
    const Topology& topology() const noexcept { return *topology_; }
    const FileCatalog& catalog() const noexcept { return catalog_; }
    const EngineConfig& config() const noexcept { return config_; }
    std::int64_t total_jobs() const noexcept { return static_cast<std::int64_t>(jobs_.size()); }
    JobState state_of(JobId id) const;

    struct SiteCounts {
        std::int64_t queued = 0;
        std::int64_t running = 0;
        std::int64_t done = 0;
    };
    SiteCounts counts(const SiteId& site) const;

    // Rates granted on each link during the last slice.
    std::map<LinkKey, double> committed_rates() const;
    const std::map<std::uint64_t, TransferTask>& transfers() const noexcept { return tasks_; }

private:
    struct SiteState {
        std::deque<std::size_t> queue;   // indices into jobs_
        std::vector<JobId> running;
        std::int64_t done = 0;
        std::int64_t cores = 1;
    };

    void start_jobs();
    void open_slice_streams();
    void allocate();
    void advance_stage_ins();
    void advance_jobs();
    void finish_job(RunningJob& rj, double offset);
    void fail_job(RunningJob& rj, std::string why);
    void sample();

    TransferTask& create_task(TransferKind kind, const Lfn& lfn, const SiteId& src, const SiteId& dst, JobId owner,
                              std::uint64_t key_salt);
    void close_task(std::uint64_t id, bool cancelled);
    double late_rate(const TransferTask& task);
    void account(const TransferTask& task, double bytes);

    TransferTask* stream_for(RunningJob& job, double offset) override;
    TransferStep feed(RunningJob& job, TransferTask& task, double dt, double offset) override;

    std::shared_ptr<const Topology> topology_;
    FileCatalog catalog_;
    std::vector<Job> jobs_;
    std::map<JobId, std::size_t> job_index_;
    std::vector<JobState> job_state_;
    Scenario scenario_;
    ParamTables tables_;
    EfficiencySampler sampler_;
    EngineConfig config_;
    QualityDraws draws_;
    std::unique_ptr<PlacementPolicy> policy_;

    double clock_ = 0;
    std::map<SiteId, SiteState> sites_;
    std::map<JobId, RunningJob> running_;
    std::map<std::uint64_t, TransferTask> tasks_;
    std::map<std::pair<Lfn, SiteId>, std::uint64_t> inflight_stage_ins_;
    std::uint64_t next_task_id_ = 1;

    std::unordered_map<const Link*, double> committed_;
    std::unordered_map<const Link*, double> slice_bytes_;
    bool progressed_ = false;
    bool allocated_ = false;   // this slice's allocation has run
    MetricsLog log_;
};

// Assembles the fixtures for one scenario and runs them.
MetricsLog run_scenario(const FixtureData& fixtures, Scenario scenario, const ParamTables& tables,
                        const EfficiencyHistogram& histogram, const EngineConfig& config, bool duplicate = true);

} // namespace gridsim
