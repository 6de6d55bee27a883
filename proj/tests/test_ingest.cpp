#include "support.hpp"

#include "gridsim/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace gridsim;
using namespace testing;

TEST_CASE("parse_sites")
{
    auto sites = parse_sites("site,cores,disk_tb,internal_gbps\nFNAL,10000,20000,100\n");
    REQUIRE(sites.size() == 1);
    CHECK(sites[0].id == S("FNAL"));
    CHECK(sites[0].cores == 10000);
    CHECK(sites[0].disk_capacity == 20'000'000'000'000'000ULL);
    CHECK(sites[0].internal_bandwidth == 1.25e10);

    CHECK(parse_sites("site,cores,disk_tb,internal_gbps\n").empty());
    CHECK(parse_sites("site,cores,disk_tb,internal_gbps\r\n\r\n").empty());

    CHECK_THROWS_AS(parse_sites("site,cores,disk_tb,internal_gbps\nUCSD,0,100,10\n"), ParseError);
    CHECK_THROWS_AS(parse_sites("site,cores,disk_tb,internal_gbps\nUCSD,x,100,10\n"), ParseError);
    CHECK_THROWS_AS(parse_sites("site,cores\nUCSD,1\n"), ParseError);
    CHECK_THROWS_AS(parse_sites("site,cores,disk_tb,internal_gbps\nUCSD,1,100\n"), ParseError);
    CHECK_THROWS_AS(parse_sites("site,cores,disk_tb,internal_gbps\nA,1,1,1\nA,2,1,1\n"), ValidationError);

    try {
        parse_sites("site,cores,disk_tb,internal_gbps\nFNAL,1,1,1\nUCSD,0,100,10\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("cores") != std::string::npos);
    }
}

TEST_CASE("parse_links")
{
    auto links = parse_links("src,dst,bandwidth_gbps,latency_ms,quality\nPurdue,UCSD,5,100,0.98\nUCSD,Caltech,20,20,1.0\n");
    REQUIRE(links.size() == 2);
    CHECK(links[0].bandwidth == 5e9);
    CHECK(links[0].latency_ms == 100);
    CHECK(links[0].quality == 0.98);
    CHECK(links[1].bandwidth == 1e10);

    CHECK_THROWS_AS(parse_links("src,dst,bandwidth_gbps,latency_ms,quality\nFNAL,FNAL,1,0,1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_links("src,dst,bandwidth_gbps,latency_ms,quality\nA,B,1,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse_links("src,dst,bandwidth_gbps,latency_ms,quality\nA,B,1,0,1.5\n"), ParseError);
    CHECK_THROWS_AS(parse_links("src,dst,bandwidth_gbps,latency_ms,quality\nA,B,1,-1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_links("src,dst,bandwidth_gbps,latency_ms,quality\nA,B,0,1,1\n"), ParseError);
}

TEST_CASE("clamp_bandwidth")
{
    CHECK(clamp_bandwidth(0.5e9) == 1e9);
    CHECK(clamp_bandwidth(2e10) == 1e10);
    CHECK(clamp_bandwidth(5e9) == 5e9);
    CHECK_THROWS(clamp_bandwidth(0));
}

TEST_CASE("parse_catalog")
{
    auto cat = parse_catalog("lfn,size_bytes,sites\n/store/a,1000000000,FNAL;UCSD\n");
    REQUIRE(cat.contains("/store/a"));
    CHECK(cat.at("/store/a").locations.size() == 2);
    CHECK(cat.used_bytes(S("UCSD")) == 1'000'000'000);

    CHECK_THROWS_AS(parse_catalog("lfn,size_bytes,sites\n/store/b,0,FNAL\n"), ParseError);
    CHECK_THROWS_AS(parse_catalog("lfn,size_bytes,sites\n/store/b,10,\n"), ParseError);
    CHECK_THROWS_AS(parse_catalog("lfn,size_bytes,sites\n/store/b,10,A\n/store/b,10,A\n"), ParseError);
}

TEST_CASE("parse_trace")
{
    auto t = parse_trace("job_id,site,cpu_seconds,walltime_seconds,lfns\n17,UCSD,3600,4000,/store/a\n19,MIT,10,20,\n");
    REQUIRE(t.jobs.size() == 2);
    CHECK(t.jobs[0].id == 17);
    CHECK(t.jobs[0].site == S("UCSD"));
    CHECK(t.jobs[0].cpu_seconds == 3600);
    CHECK(t.jobs[0].original_walltime == 4000);
    CHECK(t.jobs[0].inputs == std::vector<Lfn>{"/store/a"});
    CHECK(t.jobs[1].inputs.empty());

    CHECK_THROWS_AS(parse_trace("job_id,site,cpu_seconds,walltime_seconds,lfns\n18,UCSD,-5,10,\n"), ParseError);

    auto hinted = parse_trace("job_id,site,cpu_seconds,walltime_seconds,lfns\n1,UCSD,5,10,/store/x@2000;/store/y\n");
    CHECK(hinted.jobs[0].inputs == std::vector<Lfn>{"/store/x", "/store/y"});
    CHECK(hinted.size_hints.at("/store/x") == 2000);
}

TEST_CASE("duplicate_trace")
{
    Topology topo({{S("Caltech"), 1, 0, 0}, {S("FNAL"), 1, 0, 0}, {S("UCSD"), 1, 0, 0}, {S("Wisconsin"), 1, 0, 0}}, {});
    auto out = duplicate_trace({make_job(1, "UCSD", 10)}, topo, S("FNAL"));
    REQUIRE(out.size() == 2);
    CHECK(out[1].site == S("Wisconsin"));
    CHECK(out[1].id == 2);

    out = duplicate_trace({make_job(1, "Wisconsin", 10)}, topo, S("FNAL"));
    CHECK(out[1].site == S("Caltech"));

    out = duplicate_trace({make_job(1, "FNAL", 10)}, topo, S("FNAL"));
    CHECK(out[1].site == S("FNAL"));

    std::vector<Job> many;
    for (int i = 0; i < 37; ++i)
        many.push_back(make_job(i, i % 2 ? "UCSD" : "FNAL", 10));
    out = duplicate_trace(many, topo, S("FNAL"));
    CHECK(out.size() == 74);
    for (int i = 0; i < 37; ++i) {
        CHECK(out[i] == many[i]);
        CHECK(out[37 + i].id == i + 37);
        CHECK(out[37 + i].cpu_seconds == many[i].cpu_seconds);
    }
}

TEST_CASE("place_missing_at_tier1")
{
    FileCatalog cat;
    cat.insert(make_file("/store/x", 10, {"UCSD"}));
    std::vector<Job> jobs{make_job(1, "UCSD", 1, {"/store/x", "/store/y"})};

    auto out = place_missing_at_tier1(cat, jobs, S("FNAL"), {{"/store/y", 500}});
    CHECK(out.at("/store/y").locations == std::set<SiteId>{S("FNAL")});
    CHECK(out.at("/store/y").size == 500);
    CHECK(out.at("/store/x").locations == std::set<SiteId>{S("UCSD")});

    std::vector<Job> present{make_job(1, "UCSD", 1, {"/store/x"})};
    CHECK(place_missing_at_tier1(cat, present, S("FNAL"), {}) == cat);

    CHECK_THROWS_AS(place_missing_at_tier1(cat, jobs, S("FNAL"), {}), ValidationError);
}

namespace {

FixtureData grid_fixture()
{
    FixtureData f;
    f.sites = grid_sites(4, 10'000'000'000ULL);
    f.links = grid_links();
    f.catalog.insert(make_file("/a", 1'000'000'000, {"UCSD", "FNAL"}));
    f.catalog.insert(make_file("/b", 2'000'000'000, {"MIT"}));
    f.trace.jobs = {make_job(1, "UCSD", 100, {"/a"}), make_job(2, "MIT", 100, {"/b", "/c"})};
    f.trace.size_hints = {{"/c", 3'000'000'000}};
    return f;
}

} // namespace

TEST_CASE("assemble_state")
{
    SUBCASE("valid nine-site state")
    {
        auto a = assemble_state(grid_fixture(), {});
        CHECK(a.topology.sites().size() == 9);
        CHECK(a.jobs.size() == 4);
        CHECK(a.trace_length == 2);
        CHECK(a.catalog.at("/c").locations == std::set<SiteId>{S("FNAL")});
        // preplaced: the duplicate of job 1 moved to Vanderbilt and got /a there
        CHECK(a.jobs[2].site == S("Vanderbilt"));
        CHECK(a.catalog.at("/a").locations.contains(S("Vanderbilt")));
    }
    SUBCASE("no duplication")
    {
        auto a = assemble_state(grid_fixture(), {Scenario::Preplaced, S("FNAL"), false});
        CHECK(a.jobs.size() == 2);
    }
    SUBCASE("remote keeps data at tier1 only")
    {
        auto a = assemble_state(grid_fixture(), {Scenario::Remote, S("FNAL"), true});
        for (const auto& [lfn, rec] : a.catalog.records())
            CHECK(rec.locations == std::set<SiteId>{S("FNAL")});
    }
    SUBCASE("disk overflow")
    {
        auto f = grid_fixture();
        f.sites[1].disk_capacity = 10;   // UCSD
        CHECK_THROWS_AS(assemble_state(f, {}), ValidationError);
    }
    SUBCASE("all problems reported together")
    {
        auto f = grid_fixture();
        f.trace.jobs.push_back(make_job(3, "XYZ", 1));
        f.links.push_back({S("FNAL"), S("Nowhere"), 1e9, 1, 1});
        try {
            assemble_state(f, {});
            FAIL("expected validation failure");
        } catch (const ValidationError& e) {
            CHECK(e.violations().size() >= 2);
            CHECK(std::string(e.what()).find("XYZ") != std::string::npos);
            CHECK(std::string(e.what()).find("Nowhere") != std::string::npos);
        }
    }
}

TEST_CASE("fixture files round-trip")
{
    auto f = grid_fixture();
    f.catalog = place_missing_at_tier1(f.catalog, f.trace.jobs, S("FNAL"), f.trace.size_hints);
    f.sites[0].internal_bandwidth = 1.3e9;
    f.links[0].quality = 0.987;

    CHECK(parse_catalog(format_catalog(f.catalog)) == f.catalog);
    auto sites = parse_sites(format_sites(f.sites));
    REQUIRE(sites.size() == f.sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        CHECK(sites[i].id == f.sites[i].id);
        CHECK(sites[i].cores == f.sites[i].cores);
        CHECK(sites[i].disk_capacity == f.sites[i].disk_capacity);
        CHECK(sites[i].internal_bandwidth == f.sites[i].internal_bandwidth);
    }
    auto links = parse_links(format_links(f.links));
    REQUIRE(links.size() == f.links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        CHECK(links[i].src == f.links[i].src);
        CHECK(links[i].dst == f.links[i].dst);
        CHECK(links[i].bandwidth == f.links[i].bandwidth);
        CHECK(links[i].latency_ms == f.links[i].latency_ms);
        CHECK(links[i].quality == f.links[i].quality);
    }
    auto trace = parse_trace(format_trace(f.trace));
    CHECK(trace.jobs == f.trace.jobs);
    CHECK(trace.size_hints == f.trace.size_hints);
}

TEST_CASE("load_fixtures names the failing file")
{
    auto dir = std::filesystem::temp_directory_path() / "gridsim_load_test";
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    FixtureSet set{write("sites.csv", format_sites(grid_sites())), write("links.csv", format_links(grid_links())),
                   write("catalog.csv", "lfn,size_bytes,sites\n/x,0,FNAL\n"),
                   write("trace.csv", "job_id,site,cpu_seconds,walltime_seconds,lfns\n")};
    try {
        load_fixtures(set);
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("catalog.csv") != std::string::npos);
        CHECK(e.line() == 2);
    }
    std::filesystem::remove_all(dir);
}
