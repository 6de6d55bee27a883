#pragma once

#include "gridsim/model.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace gridsim {

enum class Scenario { Preplaced, Copy, Remote };

std::string_view to_string(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;

enum class AccessMode { Local, StageIn, Stream };

struct AccessDecision {
    AccessMode mode = AccessMode::Local;
    SiteId src;   // job site for Local

    bool operator==(const AccessDecision&) const = default;
};

// One decision per job input, in input order.
using AccessPlan = std::vector<AccessDecision>;

// Lowest-latency replica holder with a link to `dst`, ties broken by site
// name. `dst` itself counts at latency 0 unless excluded.
std::optional<SiteId> nearest_replica(const FileRecord& record, const SiteId& dst, const Topology& topology,
                                      const std::set<SiteId>& exclude = {});

// Stateless planning rules. An input with no reachable replica gets a
// Stream decision with an empty src, which the engine treats as a failure.
AccessPlan preplaced_policy(const FileCatalog& catalog, const Topology& topology, const Job& job);
AccessPlan copy_policy(const FileCatalog& catalog, const Topology& topology, const Job& job);
AccessPlan remote_policy(const FileCatalog& catalog, const Topology& topology, const Job& job, const SiteId& tier1);

// LRU cache of stage-in replicas at each site. Only replicas it committed
// itself are evictable, and only while unpinned.
class ReplicaCache {
public:
    explicit ReplicaCache(const Topology& topology) : topology_(&topology) {}

    // Makes room for `size` bytes of `lfn` at `site`, evicting as needed.
    // Returns false when the space cannot be found.
    bool reserve(FileCatalog& catalog, const Lfn& lfn, const SiteId& site, Bytes size);
    void commit(FileCatalog& catalog, const Lfn& lfn, const SiteId& site);
    void cancel(const Lfn& lfn, const SiteId& site);
    bool pending(const Lfn& lfn, const SiteId& site) const;

    void pin(const Lfn& lfn, const SiteId& site);
    void unpin(const Lfn& lfn, const SiteId& site);
    void touch(const Lfn& lfn, const SiteId& site);

    Bytes reserved_bytes(const SiteId& site) const;
    std::uint64_t evictions() const noexcept { return evictions_; }

private:
    using Key = std::pair<Lfn, SiteId>;

    const Topology* topology_;
    std::map<Key, Bytes> reservations_;
    std::map<SiteId, Bytes> reserved_;
    std::map<Key, int> pins_;
    std::map<Key, std::uint64_t> stamp_;                       // cached replicas only
    std::map<SiteId, std::map<std::uint64_t, Lfn>> lru_;      // stamp -> lfn, oldest first
    std::uint64_t clock_ = 0;
    std::uint64_t evictions_ = 0;
};

// The interface the engine consults: once at assembly to rewrite replica
// locations, then at each job start and on transfer lifecycle events.
class PlacementPolicy {
public:
    PlacementPolicy(const Topology& topology, SiteId tier1) : topology_(&topology), tier1_(std::move(tier1)) {}
    virtual ~PlacementPolicy() = default;

    virtual Scenario scenario() const noexcept = 0;

    virtual AccessPlan plan(const Job& job, FileCatalog& catalog) = 0;

    virtual void source_acquired(const Lfn&, const SiteId&) {}
    virtual void source_released(const Lfn&, const SiteId&) {}
    virtual void stage_in_landed(FileCatalog&, const Lfn&, const SiteId&) {}
    virtual void stage_in_abandoned(const Lfn&, const SiteId&) {}
    virtual void job_finished(const Job&, const AccessPlan&) {}

protected:
    const Topology* topology_;
    SiteId tier1_;
};

std::unique_ptr<PlacementPolicy> make_policy(Scenario scenario, const Topology& topology, const SiteId& tier1);

// Assembly-time catalog rewrite. Preplaced: each duplicated job (index >=
// trace_length) gets a replica at its new site for every input its original
// read locally. Copy and Remote: every file lives at tier1 only.
void prepare_catalog(Scenario scenario, FileCatalog& catalog, const std::vector<Job>& jobs, std::size_t trace_length,
                     const SiteId& tier1);

} // namespace gridsim
