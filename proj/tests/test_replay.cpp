#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "core/replay.hpp"

using namespace aftrl;

namespace {

Transition make_t(double tag) {
    return {{tag, tag + 0.5}, {tag * 2.0}, tag * 10.0, {tag + 1.0, tag + 1.5}, false};
}

OfflineDataset make_dataset(std::size_t n) {
    OfflineDataset ds;
    ds.meta.env = "PointWalker";
    ds.meta.policy_tag = "test";
    ds.meta.seed = 1;
    for (std::size_t i = 0; i < n; ++i) ds.transitions.push_back(make_t(double(i)));
    ds.meta.count = n;
    return ds;
}

}  // namespace

TEST_CASE("buffer evicts oldest entries first at capacity") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) buf.push(make_t(double(i)));
    CHECK(buf.size() == 3);
    CHECK(buf.inserted() == 5);
    CHECK(buf.at(0).s[0] == 2.0);
    CHECK(buf.at(1).s[0] == 3.0);
    CHECK(buf.at(2).s[0] == 4.0);
}

TEST_CASE("sampling an empty buffer is a logic error") {
    ReplayBuffer buf(4);
    Rng rng(1);
    CHECK_THROWS_AS(buf.sample(2, rng), std::logic_error);
}

TEST_CASE("sampling is uniform with replacement (chi-square)") {
    ReplayBuffer buf(10);
    for (int i = 0; i < 10; ++i) buf.push(make_t(double(i)));
    Rng rng(2024);
    std::vector<long> counts(10, 0);
    const long draws = 100000;
    long total = 0;
    while (total < draws) {
        auto batch = buf.sample(64, rng);
        for (const auto& t : batch) {
            ++counts[std::size_t(t.s[0])];
            if (++total == draws) break;
        }
    }
    double expected = double(draws) / 10.0;
    double chi2 = 0.0;
    for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // 9 dof: p > 0.001 iff chi2 < 27.88
    CHECK(chi2 < 27.88);
}

TEST_CASE("offline seeding inserts exactly floor(r_off * N) distinct items") {
    OfflineDataset ds = make_dataset(1000);
    for (double r_off : {0.0, 0.1, 0.333, 0.9999, 1.0}) {
        ReplayBuffer buf(10000);
        Rng rng(5);
        init_with_offline(buf, ds, r_off, rng);
        std::size_t want = std::size_t(std::floor(r_off * 1000.0));
        CHECK(buf.size() == want);
        std::set<double> seen;
        for (std::size_t i = 0; i < buf.size(); ++i) seen.insert(buf.at(i).s[0]);
        CHECK(seen.size() == want);  // without replacement
    }
    ReplayBuffer buf(10);
    Rng rng(5);
    CHECK_THROWS_AS(init_with_offline(buf, ds, -0.1, rng), ConfigError);
    CHECK_THROWS_AS(init_with_offline(buf, ds, 1.5, rng), ConfigError);
}

TEST_CASE("dataset round trip is bit exact, including awkward doubles") {
    OfflineDataset ds = make_dataset(5);
    ds.transitions[1].r = 0.1 + 0.2;            // not exactly 0.3
    ds.transitions[2].r = -1.7976931348623157e308;
    ds.transitions[3].a[0] = 4.9406564584124654e-324;  // subnormal
    ds.transitions[4].done = true;
    std::string path = (std::filesystem::temp_directory_path() / "ds_roundtrip.txt").string();
    save_dataset(ds, path);
    OfflineDataset back = load_dataset(path);
    CHECK(back.meta.env == ds.meta.env);
    CHECK(back.meta.policy_tag == ds.meta.policy_tag);
    CHECK(back.meta.count == ds.meta.count);
    REQUIRE(back.transitions.size() == ds.transitions.size());
    for (std::size_t i = 0; i < ds.transitions.size(); ++i) {
        CHECK(back.transitions[i].s == ds.transitions[i].s);
        CHECK(back.transitions[i].a == ds.transitions[i].a);
        CHECK(back.transitions[i].r == ds.transitions[i].r);
        CHECK(back.transitions[i].s_next == ds.transitions[i].s_next);
        CHECK(back.transitions[i].done == ds.transitions[i].done);
    }
    std::filesystem::remove(path);
}

TEST_CASE("truncated and malformed dataset files raise I/O errors") {
    OfflineDataset ds = make_dataset(10);
    std::string path = (std::filesystem::temp_directory_path() / "ds_broken.txt").string();
    save_dataset(ds, path);

    // drop the last two lines
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();
    {
        std::ofstream out(path);
        for (std::size_t i = 0; i + 2 < lines.size(); ++i) out << lines[i] << "\n";
    }
    CHECK_THROWS_AS(load_dataset(path), IoError);

    // corrupt a record line
    {
        std::ofstream out(path);
        out << lines[0] << "\n";
        out << "not a record\n";
    }
    CHECK_THROWS_AS(load_dataset(path), IoError);

    // bad header
    {
        std::ofstream out(path);
        out << "{\"format\": \"something-else\"}\n";
    }
    CHECK_THROWS_AS(load_dataset(path), IoError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_dataset(path), IoError);
}

TEST_CASE("offline seeding is deterministic in the rng seed") {
    OfflineDataset ds = make_dataset(100);
    ReplayBuffer b1(1000), b2(1000), b3(1000);
    Rng r1(9), r2(9), r3(10);
    init_with_offline(b1, ds, 0.5, r1);
    init_with_offline(b2, ds, 0.5, r2);
    init_with_offline(b3, ds, 0.5, r3);
    bool same12 = true, same13 = true;
    for (std::size_t i = 0; i < b1.size(); ++i) {
        same12 = same12 && b1.at(i).s[0] == b2.at(i).s[0];
        same13 = same13 && b1.at(i).s[0] == b3.at(i).s[0];
    }
    CHECK(same12);
    CHECK(!same13);
}
