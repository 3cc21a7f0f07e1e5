#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "metrics.hpp"

using namespace unireg;

namespace {

// O(n^2) oracle: pooled symmetric boundary distances, 95th percentile.
double hd95_bruteforce(const LabelField& a, const LabelField& b,
                       const std::vector<double>& spacing) {
    const int d = a.dim();
    const auto boundary_points = [&](const LabelField& mask) {
        std::vector<std::vector<int>> pts;
        std::vector<int> idx(d, 0);
        for (long lin = 0; lin < mask.count(); ++lin) {
            if (mask.values[lin] != 0) {
                bool edge = false;
                for (int ax = 0; ax < d && !edge; ++ax)
                    for (int dir = -1; dir <= 1 && !edge; dir += 2) {
                        std::vector<int> n = idx;
                        n[ax] += dir;
                        if (n[ax] < 0 || n[ax] >= mask.extents[ax] ||
                            mask.values[linear_index(mask.extents, n)] == 0)
                            edge = true;
                    }
                if (edge) pts.push_back(idx);
            }
            for (int ax = d - 1; ax >= 0; --ax) {
                if (++idx[ax] < mask.extents[ax]) break;
                idx[ax] = 0;
            }
        }
        return pts;
    };
    const auto pa = boundary_points(a);
    const auto pb = boundary_points(b);
    REQUIRE(!pa.empty());
    REQUIRE(!pb.empty());
    const auto nearest = [&](const std::vector<int>& p, const std::vector<std::vector<int>>& set) {
        double best = 1e300;
        for (const auto& q : set) {
            double d2 = 0.0;
            for (int ax = 0; ax < d; ++ax) {
                const double dd = (p[ax] - q[ax]) * spacing[ax];
                d2 += dd * dd;
            }
            best = std::min(best, d2);
        }
        return std::sqrt(best);
    };
    std::vector<double> pooled;
    for (const auto& p : pa) pooled.push_back(nearest(p, pb));
    for (const auto& q : pb) pooled.push_back(nearest(q, pa));
    std::sort(pooled.begin(), pooled.end());
    const double t = 0.95 * (pooled.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(t));
    const size_t hi = std::min(lo + 1, pooled.size() - 1);
    return pooled[lo] + (t - lo) * (pooled[hi] - pooled[lo]);
}

LabelField random_mask(const std::vector<int>& extents, uint64_t seed, double density) {
    LabelField mask(extents);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& v : mask.values) v = unit(rng) < density ? 1 : 0;
    return mask;
}

}  // namespace

TEST_CASE("corner relative distance analytic cases") {
    const std::vector<int> extents = {100, 100};
    const PointMap identity = [](const std::vector<double>& p) { return p; };
    CHECK(corner_relative_distance(identity, identity, extents) == 0.0);

    // uniform +5 px shift along axis 1 on a 100x100 image -> 5.0
    const PointMap shifted = [](const std::vector<double>& p) {
        return std::vector<double>{p[0], p[1] + 5.0};
    };
    CHECK(corner_relative_distance(shifted, identity, extents) ==
          doctest::Approx(5.0).epsilon(1e-9));

    // translation equivariance
    const PointMap id_plus = [](const std::vector<double>& p) {
        return std::vector<double>{p[0] + 2.5, p[1] - 1.0};
    };
    const PointMap sh_plus = [](const std::vector<double>& p) {
        return std::vector<double>{p[0] + 2.5, p[1] + 4.0};
    };
    CHECK(corner_relative_distance(sh_plus, id_plus, extents) ==
          doctest::Approx(5.0).epsilon(1e-9));

    // 10 degree rotation about the center vs identity, evaluated numerically
    GroundTruthWarp rot;
    rot.kind = GroundTruthWarp::Kind::rigid;
    rot.extents = extents;
    rot.spacing = {1.0, 1.0};
    rot.translation_px = {0.0, 0.0};
    rot.rotation_deg = 10.0;
    double expect = 0.0;
    const double r = std::sqrt(2.0) * 49.5;  // corner radius about the center
    const double chord = 2.0 * r * std::sin(10.0 * M_PI / 360.0);
    expect = 100.0 * chord / 100.0;
    CHECK(corner_relative_distance(identity, point_map_from_warp(rot), extents) ==
          doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("success rate") {
    CHECK(success_rate({0.5, 1.9, 2.0, 3.0}, 2.0) == doctest::Approx(0.5));
    CHECK(success_rate({0.0, 0.0, 0.0}, 2.0) == 1.0);
    CHECK_THROWS(success_rate({}, 2.0));
}

TEST_CASE("dice basics") {
    LabelField a({4, 4}), b({4, 4});
    CHECK(dice(a, b) == 1.0);  // both empty

    for (int i = 0; i < 4; ++i) a.values[i] = 1;
    LabelField c = a;
    CHECK(dice(a, c) == 1.0);

    for (int i = 8; i < 10; ++i) b.values[i] = 1;
    CHECK(dice(a, b) == 0.0);  // disjoint

    // |A|=4, |B|=2, overlap 2 -> 2*2/6
    LabelField e({4, 4});
    e.values[2] = 1;
    e.values[3] = 1;
    CHECK(dice(a, e) == doctest::Approx(2.0 * 2.0 / 6.0).epsilon(1e-12));

    LabelField wrong({3, 3});
    CHECK_THROWS(dice(a, wrong));
}

TEST_CASE("weighted dice") {
    CHECK(weighted_dice({1.0, 1.0, 1.0}, {5, 9, 2}) == 1.0);
    CHECK(weighted_dice({1.0, 0.0}, {3, 1}) == doctest::Approx(0.75));
    // equal counts reduce to the plain mean
    CHECK(weighted_dice({0.2, 0.8}, {7, 7}) == doctest::Approx(0.5));
    CHECK_THROWS(weighted_dice({1.0}, {0}));
}

TEST_CASE("hd95 simple cases") {
    LabelField a({9, 9}), b({9, 9});
    a.at({4, 2}) = 1;
    b.at({4, 5}) = 1;  // 3 voxels apart on one axis
    CHECK(hd95(a, b, {1.0, 1.0}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(hd95(a, a, {1.0, 1.0}) == 0.0);
    CHECK(hd95(a, b, {2.0, 1.0}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(hd95(a, b, {1.0, 2.0}) == doctest::Approx(6.0).epsilon(1e-12));  // spacing scales

    LabelField empty({9, 9});
    CHECK_THROWS(hd95(a, empty, {1.0, 1.0}));
}

TEST_CASE("hd95 matches the brute-force oracle") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int done = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const bool volumetric = trial % 2 == 0;
        std::vector<int> extents = volumetric ? std::vector<int>{6 + trial % 7, 8, 9}
                                              : std::vector<int>{10 + trial % 3, 12};
        LabelField a = random_mask(extents, 1000 + trial, 0.15 + 0.2 * unit(rng));
        LabelField b = random_mask(extents, 2000 + trial, 0.15 + 0.2 * unit(rng));
        const bool a_empty =
            std::all_of(a.values.begin(), a.values.end(), [](int32_t v) { return v == 0; });
        const bool b_empty =
            std::all_of(b.values.begin(), b.values.end(), [](int32_t v) { return v == 0; });
        if (a_empty || b_empty) continue;
        std::vector<double> spacing(extents.size());
        for (double& s : spacing) s = 0.5 + 2.0 * unit(rng);
        const double fast = hd95(a, b, spacing);
        const double slow = hd95_bruteforce(a, b, spacing);
        CHECK(std::abs(fast - slow) < 1e-9);
        // symmetry under the pooled definition
        CHECK(std::abs(hd95(b, a, spacing) - fast) < 1e-9);
        ++done;
    }
    CHECK(done >= 45);
}

TEST_CASE("dice symmetry and range on random masks") {
    for (int trial = 0; trial < 20; ++trial) {
        LabelField a = random_mask({11, 12}, 31 + trial, 0.4);
        LabelField b = random_mask({11, 12}, 71 + trial, 0.4);
        const double dab = dice(a, b);
        CHECK(dab == dice(b, a));
        CHECK(dab >= 0.0);
        CHECK(dab <= 1.0);
        // brute-force overlap count
        long na = 0, nb = 0, ov = 0;
        for (long i = 0; i < a.count(); ++i) {
            na += a.values[i] != 0;
            nb += b.values[i] != 0;
            ov += a.values[i] != 0 && b.values[i] != 0;
        }
        CHECK(dab == doctest::Approx(2.0 * ov / (na + nb)).epsilon(1e-15));
    }
}

TEST_CASE("aggregate") {
    const Aggregate agg = aggregate({1.0, 2.0, 3.0});
    CHECK(agg.mean == doctest::Approx(2.0));
    CHECK(agg.stddev == doctest::Approx(std::sqrt(2.0 / 3.0)));
}
