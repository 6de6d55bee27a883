#include "gridsim/model.hpp"

#include <stdexcept>

namespace gridsim {

Topology::Topology(std::vector<Site> sites, std::vector<Link> links)
    : site_list_(std::move(sites)), link_list_(std::move(links))
{
    for (const auto& s : site_list_)
        sites_.try_emplace(s.id, s);
    for (const auto& l : link_list_)
        links_.try_emplace(LinkKey{l.src, l.dst}, l);
}

const Site& Topology::site(const SiteId& id) const
{
    auto it = sites_.find(id);
    if (it == sites_.end())
        throw std::out_of_range("unknown site " + id.str());
    return it->second;
}

const Link* Topology::link(const SiteId& src, const SiteId& dst) const
{
    auto it = links_.find(LinkKey{src, dst});
    return it == links_.end() ? nullptr : &it->second;
}

std::optional<double> Topology::latency(const SiteId& src, const SiteId& dst) const
{
    if (src == dst)
        return 0.0;
    if (const Link* l = link(src, dst))
        return l->latency_ms;
    return std::nullopt;
}

std::vector<std::string> validate_topology(const Topology& topology)
{
    std::vector<std::string> out;
    std::set<SiteId> seen;
    for (const auto& s : topology.site_list()) {
        if (s.id.empty())
            out.push_back("site with empty name");
        else if (!seen.insert(s.id).second)
            out.push_back("duplicate site " + s.id.str());
        if (s.cores < 1)
            out.push_back("site " + s.id.str() + ": cores must be >= 1");
        if (s.internal_bandwidth < 0)
            out.push_back("site " + s.id.str() + ": internal bandwidth must be >= 0");
    }

    std::set<LinkKey> seen_links;
    for (const auto& l : topology.link_list()) {
        const std::string name = "link " + l.src.str() + "->" + l.dst.str();
        if (!topology.has_site(l.src))
            out.push_back(name + ": unknown site " + l.src.str());
        if (!topology.has_site(l.dst))
            out.push_back(name + ": unknown site " + l.dst.str());
        if (l.src == l.dst)
            out.push_back(name + ": self-link");
        if (!seen_links.insert({l.src, l.dst}).second)
            out.push_back(name + ": duplicate link");
        if (!(l.bandwidth > 0))
            out.push_back(name + ": bandwidth must be > 0");
        if (!(l.latency_ms >= 0))
            out.push_back(name + ": latency must be >= 0");
        if (!(l.quality > 0 && l.quality <= 1))
            out.push_back(name + ": quality must be in (0, 1]");
    }
    return out;
}

void FileCatalog::insert(FileRecord record)
{
    if (record.size == 0)
        throw std::invalid_argument("file " + record.lfn + ": size must be > 0");
    if (record.locations.empty())
        throw std::invalid_argument("file " + record.lfn + ": no replica locations");
    if (records_.contains(record.lfn))
        throw std::invalid_argument("duplicate lfn " + record.lfn);
    for (const auto& s : record.locations)
        used_[s] += record.size;
    auto lfn = record.lfn;
    records_.emplace(std::move(lfn), std::move(record));
}

const FileRecord* FileCatalog::find(const Lfn& lfn) const
{
    auto it = records_.find(lfn);
    return it == records_.end() ? nullptr : &it->second;
}

const FileRecord& FileCatalog::at(const Lfn& lfn) const
{
    auto it = records_.find(lfn);
    if (it == records_.end())
        throw std::out_of_range("unknown lfn " + lfn);
    return it->second;
}

bool FileCatalog::add_replica(const Lfn& lfn, const SiteId& site)
{
    auto it = records_.find(lfn);
    if (it == records_.end())
        throw std::out_of_range("unknown lfn " + lfn);
    if (!it->second.locations.insert(site).second)
        return false;
    used_[site] += it->second.size;
    return true;
}

bool FileCatalog::remove_replica(const Lfn& lfn, const SiteId& site)
{
    auto it = records_.find(lfn);
    if (it == records_.end())
        throw std::out_of_range("unknown lfn " + lfn);
    auto& locs = it->second.locations;
    if (!locs.contains(site) || locs.size() == 1)
        return false;
    locs.erase(site);
    release(site, it->second.size);
    return true;
}

void FileCatalog::set_locations(const Lfn& lfn, std::set<SiteId> locations)
{
    if (locations.empty())
        throw std::invalid_argument("file " + lfn + ": no replica locations");
    auto it = records_.find(lfn);
    if (it == records_.end())
        throw std::out_of_range("unknown lfn " + lfn);
    for (const auto& s : it->second.locations)
        release(s, it->second.size);
    it->second.locations = std::move(locations);
    for (const auto& s : it->second.locations)
        used_[s] += it->second.size;
}

void FileCatalog::release(const SiteId& site, Bytes size)
{
    auto it = used_.find(site);
    it->second -= size;
    if (it->second == 0)
        used_.erase(it);
}

Bytes FileCatalog::used_bytes(const SiteId& site) const
{
    auto it = used_.find(site);
    return it == used_.end() ? 0 : it->second;
}

std::map<SiteId, Bytes> FileCatalog::recount() const
{
    std::map<SiteId, Bytes> out;
    for (const auto& [lfn, rec] : records_)
        for (const auto& s : rec.locations)
            out[s] += rec.size;
    return out;
}

} // namespace gridsim
