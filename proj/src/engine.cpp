#include "gridsim/engine.hpp"

#include "gridsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridsim {

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kByteEps = 1e-9;   // relative to file size

LinkKey key_of(const TransferTask& t)
{
    return {t.src, t.dst};
}

} // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept
{
    return splitmix64(seed ^ splitmix64(value));
}

std::uint64_t hash_string(std::string_view s) noexcept
{
    // FNV-1a, stable across platforms unlike std::hash
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double QualityDraws::operator()(std::uint64_t key, int attempt) const
{
    return unit_from_bits(hash_combine(hash_combine(seed_, key), static_cast<std::uint64_t>(attempt)));
}

TransferStep advance_transfer(TransferTask& task, double rate, double dt, const QualityDraws& draws)
{
    TransferStep step;
    if (!(rate > 0) || !(dt > 0))
        return step;

    const double size = static_cast<double>(task.size);
    const double remaining = size - task.bytes_done;
    const double capacity = rate * dt;
    if (remaining - capacity > kByteEps * size) {
        task.bytes_done += capacity;
        step.bytes_moved = capacity;
        step.elapsed = dt;
        return step;
    }

    step.bytes_moved = remaining;
    step.elapsed = std::min(dt, remaining / rate);
    if (draws(task.draw_key, task.attempts) < task.quality) {
        task.bytes_done = size;
        step.outcome = TransferOutcome::Completed;
        return step;
    }
    // a failed attempt re-sends the whole file
    task.bytes_done = 0;
    ++task.attempts;
    step.outcome = task.attempts >= task.max_attempts ? TransferOutcome::Exhausted : TransferOutcome::FailedAttempt;
    return step;
}

double flow_rate(const Link& link, const SpeedTable& speed, std::size_t flows, double consumption_cap)
{
    double rate = std::min(max_speed_for(speed, link.latency_ms), link.bandwidth / static_cast<double>(flows));
    if (consumption_cap > 0)
        rate = std::min(rate, consumption_cap);
    return rate;
}

std::vector<double> allocate_bandwidth(std::span<const FlowDemand> flows, const Topology& topology,
                                       const SpeedTable& speed)
{
    std::map<LinkKey, int> per_link;
    for (const auto& f : flows)
        ++per_link[{f.src, f.dst}];

    std::vector<double> rates;
    rates.reserve(flows.size());
    for (const auto& f : flows) {
        const Link* link = topology.link(f.src, f.dst);
        if (!link) {
            rates.push_back(0.0);
            continue;
        }
        rates.push_back(flow_rate(*link, speed, static_cast<std::size_t>(per_link[{f.src, f.dst}]), f.consumption_cap));
    }
    return rates;
}

std::optional<SiteId> fallback_replica(const FileCatalog& catalog, const Topology& topology, const TransferTask& task)
{
    const FileRecord* rec = catalog.find(task.lfn);
    if (!rec)
        return std::nullopt;
    auto exclude = task.exhausted_sources;
    exclude.insert(task.src);
    exclude.insert(task.dst);
    return nearest_replica(*rec, task.dst, topology, exclude);
}

RunningJob start_job(const Job& job, const AccessPlan& plan, const FileCatalog& catalog, const Topology& topology,
                     const PenaltyTable& penalty, double base_efficiency, double now)
{
    if (plan.size() != job.inputs.size())
        throw std::invalid_argument("access plan does not match job inputs");

    RunningJob rj;
    rj.job = job;
    rj.plan = plan;
    rj.base_efficiency = base_efficiency;
    rj.started_at = now;

    if (job.inputs.empty()) {
        Segment seg;
        seg.cpu_share = job.cpu_seconds;
        seg.efficiency = base_efficiency;
        seg.wall_needed = job.cpu_seconds / base_efficiency;
        rj.segments.push_back(std::move(seg));
        return rj;
    }

    double total = 0;
    for (const auto& lfn : job.inputs)
        total += static_cast<double>(catalog.at(lfn).size) * job.read_fraction;

    for (std::size_t i = 0; i < job.inputs.size(); ++i) {
        Segment seg;
        seg.lfn = job.inputs[i];
        seg.size = catalog.at(seg.lfn).size;
        seg.mode = plan[i].mode;
        seg.src = plan[i].src;
        seg.cpu_share = job.cpu_seconds * static_cast<double>(seg.size) * job.read_fraction / total;
        seg.efficiency = base_efficiency;
        if (seg.mode == AccessMode::Stream && !seg.src.empty())
            seg.efficiency *= 1.0 - penalty_for(penalty, topology.latency(seg.src, job.site).value_or(0.0));
        seg.wall_needed = seg.cpu_share / seg.efficiency;
        rj.segments.push_back(std::move(seg));
    }
    return rj;
}

JobStep advance_job(RunningJob& job, double from, double slice_length, StreamPort* streams)
{
    double t = from;
    while (!job.failed) {
        if (job.current >= job.segments.size())
            return {true, t};
        if (t >= slice_length - kTimeEps)
            break;

        Segment& seg = job.segments[job.current];
        if (seg.mode != AccessMode::Stream) {
            const double dt = std::min(slice_length - t, seg.wall_needed - seg.progress);
            seg.progress += dt;
            t += dt;
            if (seg.wall_needed - seg.progress <= kTimeEps) {
                seg.progress = seg.wall_needed;
                ++job.current;
            }
            continue;
        }

        if (!streams)
            throw std::logic_error("stream segment without a stream port");
        TransferTask* task = streams->stream_for(job, t);
        if (!task)
            break;
        const double rate = task->allocated_rate;
        if (!(rate > 0))
            break;   // starved until the next allocation

        const double need = (static_cast<double>(task->size) - task->bytes_done) / rate;
        const double size = static_cast<double>(task->size);
        const TransferStep step = streams->feed(job, *task, std::min(slice_length - t, need), t);
        t += step.elapsed;
        if (step.outcome == TransferOutcome::InProgress) {
            seg.progress = seg.wall_needed * task->bytes_done / size;
        } else if (step.outcome == TransferOutcome::Completed) {
            seg.progress = seg.wall_needed;
            ++job.current;
        } else {
            // the read restarts (or moves source) at the next slice
            break;
        }
    }
    if (!job.failed && job.current >= job.segments.size())
        return {true, t};
    return {false, slice_length};
}

EfficiencySampler histogram_sampler(EfficiencyHistogram histogram, std::uint64_t seed)
{
    return [hist = std::move(histogram), seed](const Job& job) {
        std::mt19937_64 rng(hash_combine(seed, static_cast<std::uint64_t>(job.id)));
        return sample_efficiency(hist, job.cpu_seconds, rng);
    };
}

Simulation::Simulation(Assembly assembly, Scenario scenario, ParamTables tables, EfficiencySampler sampler,
                       EngineConfig config)
    : topology_(std::make_shared<const Topology>(std::move(assembly.topology))),
      catalog_(std::move(assembly.catalog)),
      jobs_(std::move(assembly.jobs)),
      scenario_(scenario),
      tables_(std::move(tables)),
      sampler_(std::move(sampler)),
      config_(std::move(config)),
      draws_(config_.sweep.rng_seed)
{
    if (!(config_.slice_seconds > 0))
        throw std::invalid_argument("slice length must be > 0");
    if (config_.max_attempts < 1)
        throw std::invalid_argument("max_attempts must be >= 1");
    tables_.penalty.scale *= config_.sweep.cpu_hit_factor;
    tables_.speed.scale *= config_.sweep.max_speed_factor;
    validate(tables_.penalty);
    validate(tables_.speed);

    policy_ = make_policy(scenario_, *topology_, config_.tier1);

    for (const auto& [id, site] : topology_->sites())
        sites_[id].cores = site.cores;
    job_state_.assign(jobs_.size(), JobState::Queued);
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
        const Job& job = jobs_[i];
        if (!job_index_.emplace(job.id, i).second)
            throw std::invalid_argument("duplicate job id " + std::to_string(job.id));
        auto it = sites_.find(job.site);
        if (it == sites_.end())
            throw std::invalid_argument("job " + std::to_string(job.id) + " at unknown site " + job.site.str());
        it->second.queue.push_back(i);
    }

    log_.scenario = scenario_;
    log_.sweep = config_.sweep;
    log_.slice_seconds = config_.slice_seconds;
    log_.total_jobs = static_cast<std::int64_t>(jobs_.size());
}

JobState Simulation::state_of(JobId id) const
{
    return job_state_.at(job_index_.at(id));
}

Simulation::SiteCounts Simulation::counts(const SiteId& site) const
{
    const auto& s = sites_.at(site);
    return {static_cast<std::int64_t>(s.queue.size()), static_cast<std::int64_t>(s.running.size()), s.done};
}

MetricsLog Simulation::run(const SliceObserver& observer)
{
    sample();
    std::int64_t done = 0;
    const auto total = static_cast<std::int64_t>(jobs_.size());
    while (done < total) {
        committed_.clear();
        slice_bytes_.clear();
        progressed_ = false;
        allocated_ = false;

        start_jobs();
        open_slice_streams();
        allocate();
        advance_stage_ins();
        advance_jobs();

        clock_ += config_.slice_seconds;
        ++log_.slices;
        sample();
        if (observer)
            observer(*this);

        done = 0;
        for (const auto& [id, s] : sites_)
            done += s.done;
        if (!progressed_ && done < total)
            throw SimulationError("no progress at clock " + std::to_string(clock_) + ": " +
                                  std::to_string(total - done) + " jobs can never finish");
    }
    return std::move(log_);
}

void Simulation::start_jobs()
{
    for (auto& [site_id, site] : sites_) {
        while (!site.queue.empty() && static_cast<std::int64_t>(site.running.size()) < site.cores) {
            const std::size_t idx = site.queue.front();
            site.queue.pop_front();
            const Job& job = jobs_[idx];
            progressed_ = true;

            const double base = sampler_(job);
            AccessPlan plan = policy_->plan(job, catalog_);

            std::string unreachable;
            for (std::size_t i = 0; i < plan.size(); ++i)
                if (plan[i].mode != AccessMode::Local && plan[i].src.empty())
                    unreachable = job.inputs[i];
            if (!unreachable.empty()) {
                for (std::size_t i = 0; i < plan.size(); ++i)
                    if (plan[i].mode == AccessMode::StageIn && !plan[i].src.empty() &&
                        !inflight_stage_ins_.contains({job.inputs[i], job.site}))
                        policy_->stage_in_abandoned(job.inputs[i], job.site);
                policy_->job_finished(job, plan);
                JobRecord rec;
                rec.job_id = job.id;
                rec.site = job.site;
                rec.scenario = scenario_;
                rec.cpu_seconds = job.cpu_seconds;
                rec.base_efficiency = base;
                rec.status = JobStatus::Failed;
                rec.diagnostic = "no reachable replica of " + unreachable;
                log_.jobs.push_back(std::move(rec));
                job_state_[idx] = JobState::Done;
                ++site.done;
                continue;
            }

            RunningJob rj = start_job(job, plan, catalog_, *topology_, tables_.penalty, base, clock_);
            for (std::size_t i = 0; i < plan.size(); ++i) {
                if (plan[i].mode != AccessMode::StageIn)
                    continue;
                const auto key = std::make_pair(job.inputs[i], job.site);
                std::uint64_t task_id = 0;
                if (auto it = inflight_stage_ins_.find(key); it != inflight_stage_ins_.end()) {
                    task_id = it->second;
                    auto& owners = tasks_.at(task_id).owners;
                    if (std::find(owners.begin(), owners.end(), job.id) == owners.end())
                        owners.push_back(job.id);
                } else {
                    task_id = create_task(TransferKind::StageIn, job.inputs[i], plan[i].src, job.site, job.id, 0).id;
                }
                if (std::find(rj.pending_stage_ins.begin(), rj.pending_stage_ins.end(), task_id) ==
                    rj.pending_stage_ins.end())
                    rj.pending_stage_ins.push_back(task_id);
            }
            site.running.push_back(job.id);
            job_state_[idx] = JobState::Running;
            running_.emplace(job.id, std::move(rj));
        }
    }
}

void Simulation::open_slice_streams()
{
    for (auto& [id, rj] : running_) {
        if (rj.failed || !rj.pending_stage_ins.empty() || rj.current >= rj.segments.size())
            continue;
        if (rj.segments[rj.current].mode == AccessMode::Stream)
            stream_for(rj, 0.0);
    }
}

void Simulation::allocate()
{
    std::unordered_map<const Link*, std::size_t> flows;
    for (const auto& [id, task] : tasks_)
        if (task.link)
            ++flows[task.link];
    for (auto& [id, task] : tasks_) {
        if (!task.link) {
            task.allocated_rate = 0;
            continue;
        }
        task.allocated_rate = flow_rate(*task.link, tables_.speed, flows[task.link],
                                        task.kind == TransferKind::Stream ? task.consumption_rate : 0.0);
        committed_[task.link] += task.allocated_rate;
    }
    allocated_ = true;
}

std::map<LinkKey, double> Simulation::committed_rates() const
{
    std::map<LinkKey, double> out;
    for (const auto& [link, rate] : committed_)
        out[{link->src, link->dst}] += rate;
    return out;
}

double Simulation::late_rate(const TransferTask& task)
{
    if (!task.link)
        return 0.0;
    double& used = committed_[task.link];
    double rate = std::min(max_speed_for(tables_.speed, task.link->latency_ms), std::max(0.0, task.link->bandwidth - used));
    if (task.kind == TransferKind::Stream && task.consumption_rate > 0)
        rate = std::min(rate, task.consumption_rate);
    used += rate;
    return rate;
}

void Simulation::account(const TransferTask& task, double bytes)
{
    if (bytes > 0) {
        slice_bytes_[task.link] += bytes;
        progressed_ = true;
    }
}

TransferTask& Simulation::create_task(TransferKind kind, const Lfn& lfn, const SiteId& src, const SiteId& dst,
                                      JobId owner, std::uint64_t key_salt)
{
    TransferTask task;
    task.id = next_task_id_++;
    task.kind = kind;
    task.lfn = lfn;
    task.size = catalog_.at(lfn).size;
    task.src = src;
    task.dst = dst;
    task.owners = {owner};
    task.max_attempts = config_.max_attempts;
    task.link = topology_->link(src, dst);
    if (task.link)
        task.quality = task.link->quality;
    std::uint64_t key = hash_string(lfn);
    key = hash_combine(key, hash_string(src.str()));
    key = hash_combine(key, hash_string(dst.str()));
    key = hash_combine(key, static_cast<std::uint64_t>(owner));
    key = hash_combine(key, key_salt + (kind == TransferKind::Stream ? 0x5157ULL : 0));
    task.draw_key = key;

    policy_->source_acquired(lfn, src);
    auto& stored = tasks_.emplace(task.id, std::move(task)).first->second;
    if (kind == TransferKind::StageIn)
        inflight_stage_ins_[{lfn, dst}] = stored.id;
    return stored;
}

void Simulation::close_task(std::uint64_t id, bool cancelled)
{
    auto it = tasks_.find(id);
    if (it == tasks_.end())
        return;
    TransferTask& task = it->second;
    if (cancelled && task.bytes_done > 0)
        log_.attempted_bytes[key_of(task)] += task.bytes_done;
    policy_->source_released(task.lfn, task.src);
    if (task.kind == TransferKind::StageIn) {
        auto f = inflight_stage_ins_.find({task.lfn, task.dst});
        if (f != inflight_stage_ins_.end() && f->second == id)
            inflight_stage_ins_.erase(f);
    }
    tasks_.erase(it);
}

void Simulation::advance_stage_ins()
{
    std::vector<std::uint64_t> ids;
    for (const auto& [id, task] : tasks_)
        if (task.kind == TransferKind::StageIn)
            ids.push_back(id);

    for (const std::uint64_t id : ids) {
        TransferTask& task = tasks_.at(id);
        const TransferStep step = advance_transfer(task, task.allocated_rate, config_.slice_seconds, draws_);
        account(task, step.bytes_moved);
        if (step.outcome == TransferOutcome::InProgress || step.outcome == TransferOutcome::FailedAttempt) {
            if (step.outcome == TransferOutcome::FailedAttempt)
                log_.attempted_bytes[key_of(task)] += static_cast<double>(task.size);
            continue;
        }
        log_.attempted_bytes[key_of(task)] += static_cast<double>(task.size);

        if (step.outcome == TransferOutcome::Completed) {
            policy_->stage_in_landed(catalog_, task.lfn, task.dst);
            for (const JobId owner : task.owners) {
                auto rj = running_.find(owner);
                if (rj == running_.end())
                    continue;
                auto& pending = rj->second.pending_stage_ins;
                pending.erase(std::remove(pending.begin(), pending.end(), id), pending.end());
                rj->second.ready_offset = std::max(rj->second.ready_offset, step.elapsed);
                if (pending.empty())
                    rj->second.stage_in_wait = clock_ + rj->second.ready_offset - rj->second.started_at;
            }
            close_task(id, false);
            continue;
        }

        // exhausted: try another replica from the next slice on
        auto next = fallback_replica(catalog_, *topology_, task);
        if (!next) {
            policy_->stage_in_abandoned(task.lfn, task.dst);
            for (const JobId owner : task.owners)
                if (auto rj = running_.find(owner); rj != running_.end())
                    fail_job(rj->second, "all replicas of " + task.lfn + " exhausted");
            close_task(id, false);
            continue;
        }
        auto exhausted = task.exhausted_sources;
        exhausted.insert(task.src);
        const auto owners = task.owners;
        const Lfn lfn = task.lfn;
        const SiteId dst = task.dst;
        close_task(id, false);
        TransferTask& fresh = create_task(TransferKind::StageIn, lfn, *next, dst, owners.front(), exhausted.size());
        fresh.owners = owners;
        fresh.exhausted_sources = std::move(exhausted);
        for (const JobId owner : owners) {
            if (auto rj = running_.find(owner); rj != running_.end())
                std::replace(rj->second.pending_stage_ins.begin(), rj->second.pending_stage_ins.end(), id, fresh.id);
        }
    }
}

TransferTask* Simulation::stream_for(RunningJob& job, double offset)
{
    (void)offset;
    if (job.stream) {
        if (auto it = tasks_.find(*job.stream); it != tasks_.end())
            return &it->second;
        job.stream.reset();
    }
    Segment& seg = job.segments[job.current];
    if (seg.src.empty()) {
        fail_job(job, "no reachable replica of " + seg.lfn);
        return nullptr;
    }
    TransferTask& task = create_task(TransferKind::Stream, seg.lfn, seg.src, job.job.site, job.job.id,
                                     job.current * 1000 + seg.exhausted_sources.size());
    task.consumption_rate = static_cast<double>(seg.size) / seg.wall_needed;
    task.exhausted_sources = seg.exhausted_sources;
    job.stream = task.id;
    if (allocated_)
        task.allocated_rate = late_rate(task);
    return &task;
}

TransferStep Simulation::feed(RunningJob& job, TransferTask& task, double dt, double offset)
{
    (void)offset;
    const TransferStep step = advance_transfer(task, task.allocated_rate, dt, draws_);
    account(task, step.bytes_moved);
    if (step.outcome == TransferOutcome::InProgress)
        return step;
    log_.attempted_bytes[key_of(task)] += static_cast<double>(task.size);

    Segment& seg = job.segments[job.current];
    switch (step.outcome) {
    case TransferOutcome::Completed:
        close_task(task.id, false);
        job.stream.reset();
        break;
    case TransferOutcome::FailedAttempt:
        // the job re-reads and re-processes the file
        seg.progress = 0;
        break;
    case TransferOutcome::Exhausted: {
        seg.exhausted_sources.insert(task.src);
        auto next = fallback_replica(catalog_, *topology_, task);
        close_task(task.id, false);
        job.stream.reset();
        seg.progress = 0;
        if (!next) {
            fail_job(job, "all replicas of " + seg.lfn + " exhausted");
            break;
        }
        seg.src = *next;
        seg.efficiency = job.base_efficiency *
                         (1.0 - penalty_for(tables_.penalty, topology_->latency(seg.src, job.job.site).value_or(0.0)));
        seg.wall_needed = seg.cpu_share / seg.efficiency;
        break;
    }
    case TransferOutcome::InProgress: break;
    }
    return step;
}

void Simulation::fail_job(RunningJob& rj, std::string why)
{
    if (rj.failed)
        return;
    rj.failed = true;
    rj.diagnostic = std::move(why);
}

void Simulation::advance_jobs()
{
    std::vector<std::pair<JobId, double>> finished;
    for (auto& [id, rj] : running_) {
        if (rj.failed) {
            finished.emplace_back(id, config_.slice_seconds);
            continue;
        }
        if (!rj.pending_stage_ins.empty())
            continue;
        if (rj.ready_offset < config_.slice_seconds)
            progressed_ = true;
        const JobStep step = advance_job(rj, rj.ready_offset, config_.slice_seconds, this);
        if (rj.failed)
            finished.emplace_back(id, config_.slice_seconds);
        else if (step.completed)
            finished.emplace_back(id, step.offset);
    }
    for (auto& [id, rj] : running_)
        rj.ready_offset = 0;

    for (const auto& [id, offset] : finished)
        finish_job(running_.at(id), offset);
}

void Simulation::finish_job(RunningJob& rj, double offset)
{
    const Job& job = rj.job;
    JobRecord rec;
    rec.job_id = job.id;
    rec.site = job.site;
    rec.scenario = scenario_;
    rec.cpu_seconds = job.cpu_seconds;
    rec.base_efficiency = rj.base_efficiency;
    rec.wall_clock = clock_ + offset - rj.started_at;
    if (rj.pending_stage_ins.empty())
        rec.stage_in_wait = rj.stage_in_wait;
    else
        rec.stage_in_wait = rec.wall_clock;
    if (rj.failed) {
        rec.status = JobStatus::Failed;
        rec.diagnostic = rj.diagnostic;
    } else {
        rec.realized_efficiency = job.cpu_seconds / rec.wall_clock;
    }
    log_.jobs.push_back(std::move(rec));

    // detach from shared stage-ins; a transfer nobody waits for is dropped
    for (const std::uint64_t tid : rj.pending_stage_ins) {
        auto it = tasks_.find(tid);
        if (it == tasks_.end())
            continue;
        auto& owners = it->second.owners;
        owners.erase(std::remove(owners.begin(), owners.end(), job.id), owners.end());
        if (owners.empty()) {
            policy_->stage_in_abandoned(it->second.lfn, it->second.dst);
            close_task(tid, true);
        }
    }
    if (rj.stream)
        close_task(*rj.stream, true);
    policy_->job_finished(job, rj.plan);

    auto& site = sites_.at(job.site);
    site.running.erase(std::remove(site.running.begin(), site.running.end(), job.id), site.running.end());
    ++site.done;
    job_state_[job_index_.at(job.id)] = JobState::Done;
    running_.erase(job.id);
}

void Simulation::sample()
{
    std::vector<QueueSample> counts;
    counts.reserve(sites_.size());
    for (const auto& [id, s] : sites_)
        counts.push_back({0, id, static_cast<std::int64_t>(s.queue.size()), static_cast<std::int64_t>(s.running.size()),
                          s.done});
    std::map<LinkKey, double> bytes;
    for (const auto& [link, b] : slice_bytes_)
        bytes[{link->src, link->dst}] += b;
    record_slice(log_, clock_, counts, bytes);
}

MetricsLog run_scenario(const FixtureData& fixtures, Scenario scenario, const ParamTables& tables,
                        const EfficiencyHistogram& histogram, const EngineConfig& config, bool duplicate)
{
    Assembly assembly = assemble_state(fixtures, AssemblyConfig{scenario, config.tier1, duplicate});
    Simulation sim(std::move(assembly), scenario, tables, histogram_sampler(histogram, config.sweep.rng_seed), config);
    return sim.run();
}

} // namespace gridsim
