#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "scdc/augment.hpp"
#include "scdc/csv.hpp"
#include "scdc/losses.hpp"
#include "scdc/rng.hpp"
#include "scdc/spectrum.hpp"
#include "scdc/synth.hpp"

using namespace scdc;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

Spectrum make(std::vector<double> intensities, std::string id = "s") {
    auto axis = linspace(0.0, 1.0, intensities.size());
    return Spectrum(std::move(id), std::move(axis), std::move(intensities));
}

// Straightforward two-point interpolation: scan for the bracketing pair.
double interpolate_at(const std::vector<double>& x, const std::vector<double>& y, double q) {
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (q >= x[i] && q <= x[i + 1]) {
            const double t = (q - x[i]) / (x[i + 1] - x[i]);
            return y[i] * (1 - t) + y[i + 1] * t;
        }
    }
    return q < x.front() ? y.front() : y.back();
}

std::vector<LabeledSpectrum> labeled_set(int classes, int per_class) {
    std::vector<LabeledSpectrum> out;
    for (int c = 0; c < classes; ++c)
        for (int k = 0; k < per_class; ++k)
            out.push_back({make({double(c), double(k), 1.0}, "c" + std::to_string(c) + "_" + std::to_string(k)), c});
    return out;
}

augment::WeakAugConfig weak_off() {
    augment::WeakAugConfig w;
    w.noise_sigma = 0;
    w.scale_low = w.scale_high = 1;
    w.smooth_prob = 0;
    return w;
}

augment::StrongAugConfig strong_off() {
    augment::StrongAugConfig s;
    s.weak = weak_off();
    s.max_shift = 0;
    s.flip_prob = 0;
    return s;
}

}  // namespace

TEST_CASE("rng substreams are reproducible and tag-separated") {
    Rng a = seed_rng(42), b = seed_rng(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng x = seed_rng(42).substream("augment"), y = seed_rng(42).substream("init");
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += x.next_u64() == y.next_u64();
    CHECK(equal == 0);

    CHECK(seed_rng(7).substream("sample", 3).key() == seed_rng(7).substream("sample", 3).key());
    CHECK(seed_rng(7).substream("sample", 3).key() != seed_rng(7).substream("sample", 4).key());
    // Keys are pure functions of (seed, tag, index): pinned across processes.
    CHECK(seed_rng(0).key() == splitmix64(0x5cdc5cdc5cdc5cdcULL));
}

TEST_CASE("spectrum invariants") {
    CHECK_THROWS_AS(Spectrum("a", {1.0}, {1.0}), DataError);
    CHECK_THROWS_AS(Spectrum("a", {1.0, 2.0}, {1.0}), DataError);
    CHECK_THROWS_AS(Spectrum("a", {2.0, 1.0}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(Spectrum("a", {1.0, 1.0}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(Spectrum("a", {1.0, 2.0}, {1.0, NAN}), DataError);
    CHECK_NOTHROW(Spectrum("a", {1.0, 2.0}, {1.0, 3.0}));
}

TEST_CASE("csv loading") {
    SUBCASE("labelled rows") {
        std::istringstream in("id,label,1,2,3,4,5\na,0,1,2,3,4,5\nb,1,5,4,3,2,1\nc,1,0,0,1,0,0\n");
        const auto rows = parse_csv(in);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].label == 0);
        CHECK(rows[2].label == 1);
        for (const auto& r : rows) CHECK(r.spectrum.size() == 5);
        CHECK(rows[1].spectrum.intensities()[0] == 5.0);
    }
    SUBCASE("label column absent") {
        std::istringstream in("id,10,20,30\na,1,2,3\nb,4,5,6\n");
        const auto rows = parse_csv(in);
        REQUIRE(rows.size() == 2);
        for (const auto& r : rows) CHECK_FALSE(r.label.has_value());
    }
    SUBCASE("empty label cell") {
        std::istringstream in("id,label,10,20\na,,1,2\nb,3,4,5\n");
        const auto rows = parse_csv(in);
        CHECK_FALSE(rows[0].label.has_value());
        CHECK(rows[1].label == 3);
    }
    SUBCASE("non-numeric intensity names the row") {
        std::istringstream in("id,label,1,2,3\na,0,1,2,3\nb,1,1,x,3\n");
        try {
            parse_csv(in);
            FAIL("expected an error");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("row 2: non-numeric intensity") != std::string::npos);
        }
    }
    SUBCASE("non-increasing axis") {
        std::istringstream in("id,label,1,3,2\na,0,1,2,3\n");
        CHECK_THROWS_AS(parse_csv(in), DataError);
    }
    SUBCASE("write then read round trip") {
        std::vector<SpectrumRecord> recs{{Spectrum("p", {1.5, 2.5}, {0.1, 1.0 / 3.0}), 2},
                                         {Spectrum("q", {1.5, 2.5}, {-4e-17, 7.0}), std::nullopt}};
        std::stringstream buf;
        write_csv(buf, recs);
        const auto back = parse_csv(buf);
        REQUIRE(back.size() == 2);
        CHECK(back[0].spectrum == recs[0].spectrum);
        CHECK(back[1].spectrum == recs[1].spectrum);
        CHECK(back[0].label == 2);
        CHECK_FALSE(back[1].label.has_value());
    }
}

TEST_CASE("resample_to_length") {
    SUBCASE("constant stays constant") {
        const auto out = resample_to_length(make({5, 5, 5}), 17);
        for (double v : out.intensities()) CHECK(v == doctest::Approx(5.0).epsilon(1e-15));
    }
    SUBCASE("ramp equal to the axis is a fixed point") {
        auto axis = linspace(400, 1800, 37);
        const Spectrum s("r", axis, axis);
        for (int m : {2, 10, 1024}) {
            const auto out = resample_to_length(s, m);
            for (std::size_t i = 0; i < out.size(); ++i)
                CHECK(out.intensities()[i] == doctest::Approx(out.axis()[i]).epsilon(1e-12));
        }
    }
    SUBCASE("random length 900 vs two-point interpolation") {
        std::mt19937_64 g(5);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<double> axis(900), y(900);
        double x = 300;
        for (std::size_t i = 0; i < 900; ++i) {
            x += 0.5 + u(g);
            axis[i] = x;
            y[i] = u(g);
        }
        const auto out = resample_to_length(Spectrum("r", axis, y), 1024);
        REQUIRE(out.size() == 1024);
        CHECK(out.axis().front() == axis.front());
        CHECK(out.axis().back() == axis.back());
        CHECK(out.intensities().front() == y.front());
        CHECK(out.intensities().back() == y.back());
        std::uniform_int_distribution<std::size_t> pick(0, 1023);
        for (int probe = 0; probe < 10; ++probe) {
            const auto i = pick(g);
            CHECK(out.intensities()[i] ==
                  doctest::Approx(interpolate_at(axis, y, out.axis()[i])).epsilon(1e-12));
        }
    }
    SUBCASE("round trip through a refinement grid") {
        std::mt19937_64 g(9);
        std::uniform_real_distribution<double> u(-1, 1);
        std::vector<double> y(50);
        for (auto& v : y) v = u(g);
        const auto s = Spectrum("r", linspace(0, 49, 50), y);
        for (int k : {2, 3, 20}) {
            const auto back = resample_to_length(resample_to_length(s, k * 49 + 1), 50);
            for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(back.intensities()[i] - y[i]) < 1e-6);
        }
    }
    CHECK_THROWS_AS(resample_to_length(make({1, 2, 3}), 1), DataError);
}

TEST_CASE("minmax_normalize") {
    auto r = minmax_normalize(make({2, 4, 6}));
    CHECK_FALSE(r.degenerate);
    CHECK(std::vector<double>(r.spectrum.intensities().begin(), r.spectrum.intensities().end()) ==
          std::vector<double>{0, 0.5, 1});
    r = minmax_normalize(make({0, 0.25, 1}));
    CHECK(std::vector<double>(r.spectrum.intensities().begin(), r.spectrum.intensities().end()) ==
          std::vector<double>{0, 0.25, 1});
    r = minmax_normalize(make({7, 7, 7}));
    CHECK(r.degenerate);
    for (double v : r.spectrum.intensities()) CHECK(v == 0.0);

    std::mt19937_64 g(1);
    std::normal_distribution<double> n(3, 10);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> y(20);
        for (auto& v : y) v = n(g);
        const auto out = minmax_normalize(make(y));
        for (double v : out.spectrum.intensities()) CHECK((v >= 0.0 && v <= 1.0));
    }
}

TEST_CASE("preprocess drops degenerate spectra") {
    std::vector<LabeledSpectrum> data{{make({1, 2, 3}, "ok"), 0}, {make({4, 4, 4}, "flat"), 1}};
    std::vector<std::string> dropped;
    const auto out = preprocess_all(data, PreprocessConfig{8, true}, &dropped);
    REQUIRE(out.size() == 1);
    CHECK(out[0].spectrum.size() == 8);
    CHECK(dropped == std::vector<std::string>{"flat"});
}

TEST_CASE("split_annotated") {
    const auto data = labeled_set(3, 100);
    const auto s = split_annotated(data, 0.10, 11);
    CHECK(s.annotated.size() == 30);
    CHECK(s.unannotated.size() == 270);
    std::vector<int> per_class(3, 0);
    for (const auto& a : s.annotated) ++per_class[static_cast<std::size_t>(a.label)];
    CHECK(per_class == std::vector<int>{10, 10, 10});

    std::set<std::string> ids;
    for (const auto& a : s.annotated) ids.insert(a.spectrum.id());
    for (const auto& u : s.unannotated) ids.insert(u.id());
    CHECK(ids.size() == 300);

    CHECK(split_annotated(data, 1.0, 11).unannotated.empty());

    const auto again = split_annotated(data, 0.10, 11);
    for (std::size_t i = 0; i < s.annotated.size(); ++i)
        CHECK(again.annotated[i].spectrum.id() == s.annotated[i].spectrum.id());
    const auto other = split_annotated(data, 0.10, 12);
    bool differs = false;
    for (std::size_t i = 0; i < s.annotated.size(); ++i)
        differs = differs || other.annotated[i].spectrum.id() != s.annotated[i].spectrum.id();
    CHECK(differs);

    // Tiny classes still get one annotated sample.
    const auto tiny = split_annotated(labeled_set(4, 3), 0.05, 0);
    CHECK(tiny.annotated.size() == 4);

    auto gap = labeled_set(2, 5);
    for (auto& d : gap) d.label *= 2;  // class 1 empty
    CHECK_THROWS_AS(split_annotated(gap, 0.5, 0), DataError);
    CHECK_THROWS_AS(split_annotated(data, 0.0, 0), DataError);
}

TEST_CASE("hold_out_test is stratified and disjoint") {
    const auto data = labeled_set(6, 200);
    const auto h = hold_out_test(data, 0.4, 3);
    CHECK(h.test.size() == 480);
    CHECK(h.train.size() == 720);
    std::set<std::string> ids;
    for (const auto& t : h.train) ids.insert(t.spectrum.id());
    for (const auto& t : h.test) CHECK(ids.insert(t.spectrum.id()).second);
    const auto small = hold_out_test(labeled_set(2, 1), 0.9, 3);
    CHECK(small.train.size() == 2);
}

TEST_CASE("synthetic generator") {
    synth::SynthConfig cfg;
    cfg.length = 200;
    cfg.class_profiles = {{{800.0}, {10.0}, {1.0}, {}}, {{1300.0}, {10.0}, {1.0}, {0.1}},
                          {{1600.0}, {20.0}, {0.5}, {0.0, 0.2}}};

    SUBCASE("single peak argmax sits at the nearest grid point") {
        Rng rng = seed_rng(1);
        const auto s = synth::render_spectrum(cfg.class_profiles[0], cfg, rng);
        const auto v = s.intensities();
        const auto top = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
        const auto axis = s.axis();
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < axis.size(); ++i)
            if (std::abs(axis[i] - 800.0) < std::abs(axis[nearest] - 800.0)) nearest = i;
        CHECK(top == nearest);
    }
    SUBCASE("profile invariants") {
        synth::ClassProfile empty;
        CHECK_THROWS_AS(empty.validate(), DataError);
        synth::ClassProfile bad{{1.0}, {0.0}, {1.0}, {}};
        CHECK_THROWS_AS(bad.validate(), DataError);
    }
    SUBCASE("noise-free renders match the analytic profile") {
        Rng r1 = seed_rng(1), r2 = seed_rng(2);
        const auto a = synth::render_spectrum(cfg.class_profiles[2], cfg, r1);
        const auto b = synth::render_spectrum(cfg.class_profiles[2], cfg, r2);
        CHECK(a == b);
        const auto axis = cfg.axis();
        const auto expect = synth::evaluate_profile(cfg.class_profiles[2], cfg, axis);
        for (std::size_t i = 0; i < axis.size(); ++i) {
            const double u = (axis[i] - cfg.axis_low) / (cfg.axis_high - cfg.axis_low);
            const double direct = 0.5 * std::exp(-0.5 * std::pow((axis[i] - 1600.0) / 20.0, 2)) + 0.2 * u;
            CHECK(std::abs(a.intensities()[i] - expect[i]) <= 1e-12);
            CHECK(std::abs(expect[i] - direct) <= 1e-12);
        }
    }
    SUBCASE("dataset counts, labels and determinism") {
        cfg.samples_per_class = 50;
        cfg.noise_sigma = 0.05;
        cfg.seed = 4;
        const auto d = synth::generate_dataset(cfg);
        CHECK(d.size() == 150);
        std::vector<int> counts(3, 0);
        for (const auto& s : d) ++counts[static_cast<std::size_t>(s.label)];
        CHECK(counts == std::vector<int>{50, 50, 50});
        const auto again = synth::generate_dataset(cfg);
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i].spectrum == again[i].spectrum);
        cfg.seed = 5;
        CHECK_FALSE(synth::generate_dataset(cfg)[0].spectrum == d[0].spectrum);
    }
    SUBCASE("noise-free well-separated classes are centroid-separable") {
        cfg.samples_per_class = 20;
        CHECK(synth::nearest_centroid_accuracy(synth::generate_dataset(cfg)) == 1.0);
    }
    SUBCASE("identical profiles are allowed") {
        cfg.class_profiles[1] = cfg.class_profiles[0];
        cfg.samples_per_class = 2;
        CHECK(synth::generate_dataset(cfg).size() == 6);
    }
    SUBCASE("fewer than two profiles") {
        cfg.class_profiles.resize(1);
        CHECK_THROWS_AS(synth::generate_dataset(cfg), DataError);
    }
}

TEST_CASE("benchmark corpus sits in the calibrated difficulty band") {
    const auto cfg = synth::benchmark_config();
    CHECK(cfg.class_profiles.size() == 6);
    CHECK(cfg.samples_per_class == 200);
    CHECK(cfg.length == 1024);
    const double nc = synth::nearest_centroid_accuracy(synth::generate_dataset(cfg));
    MESSAGE("nearest-centroid accuracy " << nc);
    CHECK(nc >= 0.55);
    CHECK(nc <= 0.80);
}

TEST_CASE("weak augmentation") {
    Rng rng = seed_rng(3);
    const auto s = make({1, 2, 3});
    SUBCASE("all perturbations off is the identity") {
        CHECK(augment::weak_augment(s, weak_off(), rng) == s);
    }
    SUBCASE("pure scale") {
        auto w = weak_off();
        w.scale_low = w.scale_high = 2;
        const auto out = augment::weak_augment(s, w, rng);
        CHECK(std::vector<double>(out.intensities().begin(), out.intensities().end()) ==
              std::vector<double>{2, 4, 6});
    }
    SUBCASE("single peak keeps its argmax under the default config") {
        std::vector<double> y(256);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::exp(-0.5 * std::pow((double(i) - 100.0) / 3.0, 2));
        const auto peak = make(y);
        int kept = 0;
        for (std::uint64_t t = 0; t < 1000; ++t) {
            Rng r = seed_rng(t);
            const auto out = augment::weak_augment(peak, augment::WeakAugConfig{}, r);
            const auto v = out.intensities();
            kept += std::max_element(v.begin(), v.end()) - v.begin() == 100;
        }
        CHECK(kept >= 950);
    }
    SUBCASE("hard per-channel bound without smoothing") {
        augment::WeakAugConfig w;
        w.smooth_prob = 0;
        std::mt19937_64 g(2);
        std::uniform_real_distribution<double> u(0, 1);
        for (std::uint64_t t = 0; t < 200; ++t) {
            std::vector<double> y(128);
            for (auto& v : y) v = u(g);
            const auto src = make(y);
            const double range = *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
            Rng r = seed_rng(t);
            const auto out = augment::weak_augment(src, w, r);
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double bound = std::max(std::abs(w.scale_high - 1), std::abs(1 - w.scale_low)) * std::abs(y[i]) +
                                     6 * w.noise_sigma * range;
                CHECK(std::abs(out.intensities()[i] - y[i]) <= bound);
                CHECK(std::isfinite(out.intensities()[i]));
            }
        }
    }
    SUBCASE("smoothing keeps constants and length") {
        const std::vector<double> flat(9, 2.0);
        for (double v : augment::gaussian_smooth(flat, 5)) CHECK(v == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(augment::gaussian_smooth(std::vector<double>{1, 2}, 7).size() == 2);
    }
}

TEST_CASE("strong augmentation") {
    Rng rng = seed_rng(5);
    const auto s = make({1, 2, 3});
    CHECK(augment::strong_augment(s, strong_off(), rng) == s);

    auto flip = strong_off();
    flip.flip_prob = 1;
    const auto f = augment::strong_augment(s, flip, rng);
    CHECK(std::vector<double>(f.intensities().begin(), f.intensities().end()) == std::vector<double>{3, 2, 1});

    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(augment::circular_shift(x, 2) == std::vector<double>{4, 5, 1, 2, 3});
    for (long k = -7; k <= 7; ++k) CHECK(augment::circular_shift(augment::circular_shift(x, k), -k) == x);

    auto too_far = strong_off();
    too_far.max_shift = 3;
    CHECK_THROWS_AS(augment::strong_augment(s, too_far, rng), DataError);

    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (std::uint64_t t = 0; t < 100; ++t) {
        std::vector<double> y(64);
        for (auto& v : y) v = u(g);
        Rng r = seed_rng(t);
        augment::StrongAugConfig cfg;
        cfg.max_shift = 20;
        const auto out = augment::strong_augment(make(y), cfg, r);
        CHECK(out.size() == 64);
        for (double v : out.intensities()) CHECK(std::isfinite(v));
    }
}

TEST_CASE("augmented pairs") {
    const auto s = make({0.1, 0.7, 0.3, 0.9, 0.2, 0.4});
    const auto off = augment::make_pair(s, weak_off(), strong_off(), seed_rng(1));
    CHECK(off.weak_view == s);
    CHECK(off.strong_view == s);
    CHECK(off.source_id == "s");

    const auto a = augment::make_pair(s, {}, {.weak = {}, .max_shift = 2}, seed_rng(9));
    const auto b = augment::make_pair(s, {}, {.weak = {}, .max_shift = 2}, seed_rng(9));
    CHECK(a.weak_view == b.weak_view);
    CHECK(a.strong_view == b.strong_view);

    std::vector<double> y(256);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = std::exp(-0.5 * std::pow((double(i) - 60.0) / 5.0, 2)) +
               0.6 * std::exp(-0.5 * std::pow((double(i) - 170.0) / 8.0, 2)) + 0.05;
    const auto src = make(y);
    int weak_closer = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto p = augment::make_pair(src, {}, {}, seed_rng(t));
        const double cw = loss::cosine_similarity(p.weak_view.intensities(), src.intensities());
        const double cs = loss::cosine_similarity(p.strong_view.intensities(), src.intensities());
        weak_closer += cw > cs;
    }
    MESSAGE("weak view closer in " << weak_closer << " of 1000 trials");
    CHECK(weak_closer >= 900);
}
