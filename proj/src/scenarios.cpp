#include "gridsim/scenarios.hpp"

#include <limits>
#include <stdexcept>

namespace gridsim {

std::string_view to_string(Scenario s) noexcept
{
    switch (s) {
    case Scenario::Preplaced: return "preplaced";
    case Scenario::Copy: return "copy";
    case Scenario::Remote: return "remote";
    }
    return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept
{
    if (name == "preplaced")
        return Scenario::Preplaced;
    if (name == "copy")
        return Scenario::Copy;
    if (name == "remote")
        return Scenario::Remote;
    return std::nullopt;
}

std::optional<SiteId> nearest_replica(const FileRecord& record, const SiteId& dst, const Topology& topology,
                                      const std::set<SiteId>& exclude)
{
    std::optional<SiteId> best;
    double best_latency = std::numeric_limits<double>::infinity();
    // locations iterate in name order, so strict < keeps the smaller name on ties
    for (const auto& site : record.locations) {
        if (exclude.contains(site))
            continue;
        auto lat = topology.latency(site, dst);
        if (lat && *lat < best_latency) {
            best_latency = *lat;
            best = site;
        }
    }
    return best;
}

namespace {

AccessDecision local_or(AccessMode remote_mode, const FileRecord& rec, const Topology& topology, const SiteId& site)
{
    if (rec.locations.contains(site))
        return {AccessMode::Local, site};
    auto src = nearest_replica(rec, site, topology);
    return {remote_mode, src.value_or(SiteId{})};
}

} // namespace

AccessPlan preplaced_policy(const FileCatalog& catalog, const Topology& topology, const Job& job)
{
    AccessPlan plan;
    plan.reserve(job.inputs.size());
    for (const auto& lfn : job.inputs)
        plan.push_back(local_or(AccessMode::Stream, catalog.at(lfn), topology, job.site));
    return plan;
}

AccessPlan copy_policy(const FileCatalog& catalog, const Topology& topology, const Job& job)
{
    AccessPlan plan;
    plan.reserve(job.inputs.size());
    for (const auto& lfn : job.inputs)
        plan.push_back(local_or(AccessMode::StageIn, catalog.at(lfn), topology, job.site));
    return plan;
}

AccessPlan remote_policy(const FileCatalog& catalog, const Topology& topology, const Job& job, const SiteId& tier1)
{
    AccessPlan plan;
    plan.reserve(job.inputs.size());
    for (const auto& lfn : job.inputs) {
        const auto& rec = catalog.at(lfn);
        if (job.site == tier1 && rec.locations.contains(tier1))
            plan.push_back({AccessMode::Local, tier1});
        else if (rec.locations.contains(tier1) && topology.link(tier1, job.site))
            plan.push_back({AccessMode::Stream, tier1});
        else
            plan.push_back({AccessMode::Stream, SiteId{}});
    }
    return plan;
}

bool ReplicaCache::reserve(FileCatalog& catalog, const Lfn& lfn, const SiteId& site, Bytes size)
{
    const Bytes capacity = topology_->site(site).disk_capacity;
    auto needed = [&] { return catalog.used_bytes(site) + reserved_bytes(site) + size; };

    auto& order = lru_[site];
    auto it = order.begin();
    while (needed() > capacity && it != order.end()) {
        const Key key{it->second, site};
        auto pin = pins_.find(key);
        if (pin != pins_.end() && pin->second > 0) {
            ++it;
            continue;
        }
        if (!catalog.remove_replica(key.first, site)) {
            ++it;
            continue;
        }
        stamp_.erase(key);
        it = order.erase(it);
        ++evictions_;
    }
    if (needed() > capacity)
        return false;

    reservations_[{lfn, site}] = size;
    reserved_[site] += size;
    return true;
}

void ReplicaCache::commit(FileCatalog& catalog, const Lfn& lfn, const SiteId& site)
{
    auto it = reservations_.find({lfn, site});
    if (it == reservations_.end())
        throw std::logic_error("commit without reservation for " + lfn + " at " + site.str());
    reserved_[site] -= it->second;
    reservations_.erase(it);
    if (catalog.add_replica(lfn, site)) {
        const auto stamp = ++clock_;
        stamp_[{lfn, site}] = stamp;
        lru_[site].emplace(stamp, lfn);
    }
}

void ReplicaCache::cancel(const Lfn& lfn, const SiteId& site)
{
    auto it = reservations_.find({lfn, site});
    if (it == reservations_.end())
        return;
    reserved_[site] -= it->second;
    reservations_.erase(it);
}

bool ReplicaCache::pending(const Lfn& lfn, const SiteId& site) const
{
    return reservations_.contains({lfn, site});
}

void ReplicaCache::pin(const Lfn& lfn, const SiteId& site)
{
    ++pins_[{lfn, site}];
}

void ReplicaCache::unpin(const Lfn& lfn, const SiteId& site)
{
    auto it = pins_.find({lfn, site});
    if (it == pins_.end())
        return;
    if (--it->second <= 0)
        pins_.erase(it);
}

void ReplicaCache::touch(const Lfn& lfn, const SiteId& site)
{
    auto it = stamp_.find({lfn, site});
    if (it == stamp_.end())
        return;
    auto& order = lru_[site];
    order.erase(it->second);
    it->second = ++clock_;
    order.emplace(it->second, lfn);
}

Bytes ReplicaCache::reserved_bytes(const SiteId& site) const
{
    auto it = reserved_.find(site);
    return it == reserved_.end() ? 0 : it->second;
}

namespace {

class PreplacedPolicy final : public PlacementPolicy {
public:
    using PlacementPolicy::PlacementPolicy;
    Scenario scenario() const noexcept override { return Scenario::Preplaced; }
    AccessPlan plan(const Job& job, FileCatalog& catalog) override { return preplaced_policy(catalog, *topology_, job); }
};

class RemotePolicy final : public PlacementPolicy {
public:
    using PlacementPolicy::PlacementPolicy;
    Scenario scenario() const noexcept override { return Scenario::Remote; }
    AccessPlan plan(const Job& job, FileCatalog& catalog) override
    {
        return remote_policy(catalog, *topology_, job, tier1_);
    }
};

class CopyPolicy final : public PlacementPolicy {
public:
    CopyPolicy(const Topology& topology, SiteId tier1) : PlacementPolicy(topology, std::move(tier1)), cache_(topology) {}

    Scenario scenario() const noexcept override { return Scenario::Copy; }

    AccessPlan plan(const Job& job, FileCatalog& catalog) override
    {
        AccessPlan plan = copy_policy(catalog, *topology_, job);
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const auto& lfn = job.inputs[i];
            auto& d = plan[i];
            if (d.mode == AccessMode::StageIn && !d.src.empty() && !cache_.pending(lfn, job.site)) {
                const Bytes size = catalog.at(lfn).size;
                if (!cache_.reserve(catalog, lfn, job.site, size))
                    d.mode = AccessMode::Stream;
            }
            if (d.mode != AccessMode::Stream)
                cache_.pin(lfn, job.site);
        }
        return plan;
    }

    void source_acquired(const Lfn& lfn, const SiteId& src) override { cache_.pin(lfn, src); }
    void source_released(const Lfn& lfn, const SiteId& src) override { cache_.unpin(lfn, src); }

    void stage_in_landed(FileCatalog& catalog, const Lfn& lfn, const SiteId& site) override
    {
        cache_.commit(catalog, lfn, site);
    }

    void stage_in_abandoned(const Lfn& lfn, const SiteId& site) override { cache_.cancel(lfn, site); }

    void job_finished(const Job& job, const AccessPlan& plan) override
    {
        for (std::size_t i = 0; i < plan.size(); ++i) {
            if (plan[i].mode == AccessMode::Stream)
                continue;
            cache_.unpin(job.inputs[i], job.site);
            if (job.site != tier1_)
                cache_.touch(job.inputs[i], job.site);
        }
    }

private:
    ReplicaCache cache_;
};

} // namespace

std::unique_ptr<PlacementPolicy> make_policy(Scenario scenario, const Topology& topology, const SiteId& tier1)
{
    switch (scenario) {
    case Scenario::Preplaced: return std::make_unique<PreplacedPolicy>(topology, tier1);
    case Scenario::Copy: return std::make_unique<CopyPolicy>(topology, tier1);
    case Scenario::Remote: return std::make_unique<RemotePolicy>(topology, tier1);
    }
    throw std::invalid_argument("unknown scenario");
}

void prepare_catalog(Scenario scenario, FileCatalog& catalog, const std::vector<Job>& jobs, std::size_t trace_length,
                     const SiteId& tier1)
{
    switch (scenario) {
    case Scenario::Preplaced:
        for (std::size_t i = trace_length; i < jobs.size(); ++i) {
            const Job& dup = jobs[i];
            const Job& orig = jobs[i - trace_length];
            for (const auto& lfn : dup.inputs)
                if (catalog.at(lfn).locations.contains(orig.site))
                    catalog.add_replica(lfn, dup.site);
        }
        break;
    case Scenario::Copy:
    case Scenario::Remote: {
        std::vector<Lfn> names;
        names.reserve(catalog.size());
        for (const auto& [lfn, rec] : catalog.records())
            names.push_back(lfn);
        for (const auto& lfn : names)
            catalog.set_locations(lfn, {tier1});
        break;
    }
    }
}

} // namespace gridsim
