#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gridsim;
using namespace testing;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("summaries")
{
    std::vector<JobRecord> recs(3);
    recs[0].job_id = 2;
    recs[0].wall_clock = 200;
    recs[0].realized_efficiency = 0.5;
    recs[0].site = S("UCSD");
    recs[1].job_id = 1;
    recs[1].wall_clock = 100;
    recs[1].realized_efficiency = 0.75;
    recs[1].site = S("MIT");
    recs[2].job_id = 3;
    recs[2].status = JobStatus::Failed;

    auto s = summarize(recs);
    CHECK(s.total_wall == 300.0);
    CHECK(s.mean_efficiency == 0.625);
    CHECK(s.done_jobs == 2);
    CHECK(s.failed_jobs == 1);
    CHECK(s.per_site_wall.at(S("UCSD")) == 200.0);
    CHECK(s.efficiency_histogram[50] == 1);
    CHECK(s.efficiency_histogram[75] == 1);
}

TEST_CASE("record_slice suppresses idle links")
{
    MetricsLog log;
    record_slice(log, 100, {{0, S("A"), 1, 0, 0}}, {{{S("A"), S("B")}, 0.0}});
    CHECK(log.queues.size() == 1);
    CHECK(log.links.empty());
    record_slice(log, 200, {{0, S("A"), 0, 1, 0}}, {{{S("A"), S("B")}, 5e9}});
    REQUIRE(log.links.size() == 1);
    CHECK(log.links[0].clock == 200);
    CHECK(log.links[0].bytes == 5e9);
}

TEST_CASE("number formatting")
{
    CHECK(format_quantity(1300) == "1300");
    CHECK(format_quantity(5e9) == "5000000000");
    CHECK(format_quantity(0.1) == "0.1");
    CHECK(format_quantity(1562.5) == "1562.5");
    CHECK(format_fraction(0.8) == "0.8");
    CHECK(format_fraction(1.0 / 3) == "0.333333");
}

TEST_CASE("output files")
{
    FileCatalog cat;
    cat.insert(make_file("/f", 2'500'000'000, {"FNAL"}));
    Assembly a{pair_topology(), cat, {make_job(1, "UCSD", 1000, {"/f"}), make_job(2, "FNAL", 300)}, 2};
    Simulation sim(std::move(a), Scenario::Remote, {}, fixed_efficiency({{1, 0.5}, {2, 0.6}}));
    const auto log = sim.run();

    auto dir = std::filesystem::temp_directory_path() / "gridsim_metrics_test";
    std::filesystem::remove_all(dir);
    write_outputs(log, dir);

    auto jobs = read_lines(dir / "jobs.csv");
    REQUIRE(jobs.size() == 3);
    CHECK(jobs[0] == "job_id,site,scenario,cpu_s,base_eff,realized_eff,wall_s,stagein_s,status");
    CHECK(jobs[1] == "1,UCSD,remote,1000,0.5,0.4,2500,0,done");
    CHECK(jobs[2] == "2,FNAL,remote,300,0.6,0.6,500,0,done");

    auto queues = read_lines(dir / "queues.csv");
    CHECK(queues.size() == 1 + (log.slices + 1) * 2);
    CHECK(queues[1] == "0,FNAL,1,0,0");

    auto links = read_lines(dir / "links.csv");
    CHECK(links.size() == 26);
    CHECK(links[1] == "100,FNAL,UCSD,100000000");

    auto summary = read_lines(dir / "summary.csv");
    REQUIRE(summary.size() == 2);
    CHECK(summary[1] == "remote,1,1,1,3000,0.5,0");
    std::filesystem::remove_all(dir);
}
