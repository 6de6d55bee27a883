#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gridsim {

using Bytes = std::uint64_t;
using Lfn = std::string;
using JobId = std::int64_t;

class SiteId {
public:
    SiteId() = default;
    explicit SiteId(std::string name) : name_(std::move(name)) {}

    const std::string& str() const noexcept { return name_; }
    bool empty() const noexcept { return name_.empty(); }

    auto operator<=>(const SiteId&) const = default;

private:
    std::string name_;
};

struct Site {
    SiteId id;
    std::int64_t cores = 1;
    Bytes disk_capacity = 0;
    // bytes/s; parsed and kept, but nothing in the engine reads it
    double internal_bandwidth = 0.0;
};

struct Link {
    SiteId src;
    SiteId dst;
    double bandwidth = 0.0;   // bytes/s
    double latency_ms = 0.0;
    double quality = 1.0;     // per-attempt success probability
};

using LinkKey = std::pair<SiteId, SiteId>;

// Sites and directed links. Immutable once built; intra-site access has no
// Link and is treated as zero latency.
class Topology {
public:
    Topology() = default;
    Topology(std::vector<Site> sites, std::vector<Link> links);

    const std::vector<Site>& site_list() const noexcept { return site_list_; }
    const std::vector<Link>& link_list() const noexcept { return link_list_; }
    const std::map<SiteId, Site>& sites() const noexcept { return sites_; }
    const std::map<LinkKey, Link>& links() const noexcept { return links_; }

    bool has_site(const SiteId& id) const { return sites_.contains(id); }
    const Site& site(const SiteId& id) const;
    const Link* link(const SiteId& src, const SiteId& dst) const;

    // 0 for src == dst, nullopt when no link exists.
    std::optional<double> latency(const SiteId& src, const SiteId& dst) const;

private:
    std::vector<Site> site_list_;
    std::vector<Link> link_list_;
    std::map<SiteId, Site> sites_;
    std::map<LinkKey, Link> links_;
};

// Reports every broken invariant; empty means the topology is usable.
std::vector<std::string> validate_topology(const Topology& topology);

struct FileRecord {
    Lfn lfn;
    Bytes size = 0;
    std::set<SiteId> locations;

    bool operator==(const FileRecord&) const = default;
};

// LFN -> size and replica locations, with per-site usage kept in step.
class FileCatalog {
public:
    void insert(FileRecord record);

    bool contains(const Lfn& lfn) const { return records_.contains(lfn); }
    const FileRecord* find(const Lfn& lfn) const;
    const FileRecord& at(const Lfn& lfn) const;

    // Returns false when the replica was already present.
    bool add_replica(const Lfn& lfn, const SiteId& site);
    // Refuses to drop the last replica of a file.
    bool remove_replica(const Lfn& lfn, const SiteId& site);
    void set_locations(const Lfn& lfn, std::set<SiteId> locations);

    Bytes used_bytes(const SiteId& site) const;
    const std::map<SiteId, Bytes>& usage() const noexcept { return used_; }
    const std::map<Lfn, FileRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }

    // Full recount from the records, for checking the incremental figures.
    std::map<SiteId, Bytes> recount() const;

    bool operator==(const FileCatalog&) const = default;

private:
    void release(const SiteId& site, Bytes size);

    std::map<Lfn, FileRecord> records_;
    std::map<SiteId, Bytes> used_;
};

struct Job {
    JobId id = 0;
    SiteId site;
    double cpu_seconds = 0.0;
    std::vector<Lfn> inputs;
    double read_fraction = 1.0;
    double original_walltime = 0.0;

    bool operator==(const Job&) const = default;
};

enum class JobState { Queued, Running, Done };

} // namespace gridsim
