#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "exdeblur/error.hpp"
#include "exdeblur/exemplar.hpp"
#include "exdeblur/fixtures.hpp"
#include "exdeblur/image_io.hpp"
#include "exdeblur/synthesis.hpp"
#include "oracles.hpp"

using namespace exdeblur;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "exdeblur_tests" / "exemplar";
    fs::create_directories(d);
    return d;
}

GradientField random_field(std::mt19937_64& rng, int w, int h) {
    return {oracle::random_image(rng, w, h, -1, 1), oracle::random_image(rng, w, h, -1, 1)};
}

ExemplarSource face_source(int id, int size = 128, int cropped = 112) {
    const auto p = fixtures::face_identity(id);
    const int off = (size - cropped) / 2;
    const GrayImage img = crop(fixtures::render_face(p, size, size), off, off, cropped, cropped);
    const GrayImage mask = crop(fixtures::face_mask(p, size, size).to_image(), off, off, cropped, cropped);
    return {"face" + std::to_string(id), img, ContourMask::binarize(mask, 0.5)};
}

}  // namespace

TEST_CASE("manifest of two entries yields 168 variants") {
    const fs::path dir = temp_dir();
    std::ofstream man(dir / "manifest.tsv");
    for (int id = 0; id < 2; ++id) {
        const auto p = fixtures::face_identity(id);
        save_image(fixtures::render_face(p, 41, 37), dir / ("f" + std::to_string(id) + ".png"));
        save_mask(fixtures::face_mask(p, 41, 37), dir / ("m" + std::to_string(id) + ".pgm"));
        man << "f" << id << ".png\tm" << id << ".pgm\tid" << id << "\n";
    }
    man.close();
    const ExemplarDB db = build_exemplar_db(dir / "manifest.tsv");
    CHECK(db.size() == 2 * 4 * 21);
    CHECK(db.entries().front().id == "id0");
    CHECK(db.entries().back().id == "id1");
    CHECK(db.entries().back().manifest_index == 1);
}

TEST_CASE("malformed manifests are rejected") {
    const fs::path dir = temp_dir();
    std::ofstream(dir / "bad.tsv") << "only_one_column\n";
    CHECK_THROWS_AS(build_exemplar_db(dir / "bad.tsv"), Error);
    CHECK_THROWS_AS(build_exemplar_db(dir / "missing.tsv"), Error);
}

TEST_CASE("identity variant carries the original gradients") {
    const ExemplarSource src = face_source(1, 64, 51);
    const ExemplarEntry e = make_variant(src, 1.0, 0.0);
    const GradientField g = gradient(src.image);
    REQUIRE(e.gradients.width() == 51);
    for (std::size_t i = 0; i < g.dx.size(); ++i) {
        CHECK(e.gradients.dx.data()[i] == g.dx.data()[i]);
        CHECK(e.gradients.dy.data()[i] == g.dy.data()[i]);
    }
    for (std::size_t i = 0; i < src.mask.data().size(); ++i) CHECK(e.mask.data()[i] == src.mask.data()[i]);
}

TEST_CASE("variant sizes follow the scale") {
    const ExemplarSource src = face_source(2, 64, 51);
    const ExemplarEntry half = make_variant(src, 0.5, 0.0);
    CHECK(half.gradients.width() == 26);
    CHECK(half.gradients.height() == 26);
    CHECK(half.mask.width() == 26);
    const ExemplarEntry big = make_variant(src, 1.5, 7.0);
    CHECK(big.gradients.width() == 77);
    CHECK(big.rotation == 7.0);
    CHECK_THROWS_AS(make_variant(src, 3.0, 0.0), ValueError);
}

TEST_CASE("self-correlation scores one and anti-correlation minus one") {
    std::mt19937_64 rng(1);
    const GradientField q = random_field(rng, 12, 10);
    const NccResult self = ncc_score(q, q);
    CHECK(std::abs(self.score - 1.0) <= 1e-9);
    CHECK(self.shift_x == 0);
    CHECK(self.shift_y == 0);
    const GradientField neg{scale(q.dx, -1.0), scale(q.dy, -1.0)};
    const NccResult anti = ncc_score(q, neg);
    CHECK(std::abs(anti.score + 1.0) <= 1e-9);
}

TEST_CASE("ncc_score equals the exhaustive double loop") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
        const GradientField q = random_field(rng, 16, 16), e = random_field(rng, 8, 8);
        for (bool windowed : {false, true}) {
            const NccResult fast = ncc_score(q, e, {windowed});
            const NccResult direct = ncc_score_direct(q, e, {windowed});
            const oracle::Ncc ref = oracle::ncc(q, e, windowed);
            CHECK(std::abs(fast.score - ref.score) <= 1e-8);
            CHECK(std::abs(direct.score - ref.score) <= 1e-12);
            CHECK(fast.shift_x == ref.sx);
            CHECK(fast.shift_y == ref.sy);
        }
    }
}

TEST_CASE("ncc scores stay in [-1, 1]") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> sz(4, 20);
    for (int t = 0; t < 30; ++t) {
        const int qw = sz(rng) + 4, qh = sz(rng) + 4;
        const GradientField q = random_field(rng, qw, qh);
        const GradientField e = random_field(rng, std::min(qw, sz(rng)), std::min(qh, sz(rng)));
        for (bool windowed : {false, true}) {
            const double s = ncc_score(q, e, {windowed}).score;
            CHECK(s >= -1.0);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("ncc rejects exemplars that do not fit and zero inputs") {
    std::mt19937_64 rng(4);
    CHECK_THROWS_AS(ncc_score(random_field(rng, 8, 8), random_field(rng, 9, 8)), DimensionError);
    CHECK_THROWS_AS(ncc_score(GradientField::zeros(8, 8), random_field(rng, 4, 4)), DegenerateInputError);
}

TEST_CASE("match_exemplar finds the true source among distractors") {
    std::vector<ExemplarSource> sources;
    for (int id = 0; id < 10; ++id) sources.push_back(face_source(id));
    VariantGrid grid;
    grid.scales = {1.0};
    grid.rotations = {-5.0, 0.0, 5.0};
    const ExemplarDB db = build_exemplar_db(sources, grid);
    TrajectoryParams tp;
    tp.seed = 5;
    const BlurKernel k = synth_kernel(tp, 15);
    for (int id : {3, 7}) {
        const GrayImage blurred =
            apply_blur(fixtures::render_face(fixtures::face_identity(id), 128, 128), k, 0.0, 0);
        const MatchResult m = match_exemplar(blurred, db);
        CHECK(m.exemplar_id == "face" + std::to_string(id));
        const MatchResult serial = match_exemplar_serial(blurred, db);
        CHECK(serial.entry_index == m.entry_index);
        CHECK(serial.score == m.score);

        // Positive rescaling of the query leaves the argmax unchanged.
        const MatchResult scaled = match_exemplar(scale(blurred, 3.7), db);
        CHECK(scaled.entry_index == m.entry_index);
        CHECK(scaled.shift_x == m.shift_x);
        CHECK(scaled.shift_y == m.shift_y);
    }
}

TEST_CASE("an unblurred query recovers the exact pose") {
    std::vector<ExemplarSource> sources;
    for (int id = 0; id < 4; ++id) sources.push_back(face_source(id));
    VariantGrid grid;
    grid.scales = {0.5, 1.0};
    grid.rotations = {-5.0, 0.0, 5.0};
    const ExemplarDB db = build_exemplar_db(sources, grid);
    const MatchResult m = match_exemplar(fixtures::render_face(fixtures::face_identity(2), 128, 128), db);
    CHECK(m.exemplar_id == "face2");
    CHECK(m.scale == 1.0);
    CHECK(m.rotation == 0.0);
    CHECK(m.shift_x == 8);
    CHECK(m.shift_y == 8);
    // The global norm also counts query edges outside the footprint.
    CHECK(m.score < 1.0);
    const MatchResult w = match_exemplar(fixtures::render_face(fixtures::face_identity(2), 128, 128), db, {true});
    CHECK(w.entry_index == m.entry_index);
    // Only the wrapped last row and column of the crop differ.
    CHECK(w.score > 0.99);
}

TEST_CASE("single-entry database always returns its entry") {
    std::mt19937_64 rng(5);
    const ExemplarSource src{"only", oracle::random_image(rng, 10, 10), ContourMask(10, 10, 1)};
    const ExemplarDB db(std::vector<ExemplarEntry>{make_variant(src, 1.0, 0.0)});
    const MatchResult m = match_exemplar(oracle::random_image(rng, 24, 20), db);
    CHECK(m.exemplar_id == "only");
    CHECK(m.entry_index == 0);
}

TEST_CASE("variants larger than the query are skipped") {
    std::mt19937_64 rng(6);
    const ExemplarSource big{"big", oracle::random_image(rng, 30, 30), ContourMask(30, 30, 1)};
    const ExemplarSource small{"small", oracle::random_image(rng, 10, 10), ContourMask(10, 10, 1)};
    const ExemplarDB db(std::vector<ExemplarEntry>{make_variant(big, 1.0, 0.0), make_variant(small, 1.0, 0.0, 1)});
    CHECK(match_exemplar(oracle::random_image(rng, 20, 20), db).exemplar_id == "small");
    const ExemplarDB only_big(std::vector<ExemplarEntry>{make_variant(big, 1.0, 0.0)});
    CHECK_THROWS_AS(match_exemplar(oracle::random_image(rng, 20, 20), only_big), DegenerateInputError);
}

TEST_CASE("predicted_edges with a full mask reproduces the exemplar gradients") {
    std::mt19937_64 rng(7);
    const ExemplarSource src{"t", oracle::random_image(rng, 16, 12), ContourMask(16, 12, 1)};
    const ExemplarDB db(std::vector<ExemplarEntry>{make_variant(src, 1.0, 0.0)});
    MatchResult m;
    m.entry_index = 0;
    const GradientField s = predicted_edges(m, db, 16, 12);
    const GradientField t = gradient(src.image);
    for (std::size_t i = 0; i < t.dx.size(); ++i) {
        CHECK(s.dx.data()[i] == t.dx.data()[i]);
        CHECK(s.dy.data()[i] == t.dy.data()[i]);
    }
}

TEST_CASE("predicted_edges with an empty mask is zero") {
    std::mt19937_64 rng(8);
    const ExemplarSource src{"t", oracle::random_image(rng, 8, 8), ContourMask(8, 8, 0)};
    const ExemplarDB db(std::vector<ExemplarEntry>{make_variant(src, 1.0, 0.0)});
    MatchResult m;
    m.shift_x = 2;
    m.shift_y = 1;
    CHECK(predicted_edges(m, db, 12, 12).is_zero());
}

TEST_CASE("from-input edges are nonzero exactly on the shifted mask") {
    std::mt19937_64 rng(9);
    std::vector<std::uint8_t> md(8 * 6);
    std::bernoulli_distribution coin(0.5);
    for (auto& v : md) v = coin(rng) ? 1 : 0;
    const ExemplarSource src{"t", oracle::random_image(rng, 8, 6), ContourMask(8, 6, md)};
    const ExemplarDB db(std::vector<ExemplarEntry>{make_variant(src, 1.0, 0.0)});
    MatchResult m;
    m.shift_x = 3;
    m.shift_y = 2;
    const GradientField q{oracle::random_image(rng, 14, 10, 0.1, 1), oracle::random_image(rng, 14, 10, 0.1, 1)};
    const GradientField s = predicted_edges(m, db, 14, 10, EdgeSource::from_input, &q);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 14; ++x) {
            const int ex = x - 3, ey = y - 2;
            const bool on = ex >= 0 && ey >= 0 && ex < 8 && ey < 6 && src.mask(ex, ey);
            CHECK((s.dx(x, y) != 0.0) == on);
            if (on) CHECK(s.dx(x, y) == q.dx(x, y));
        }
    CHECK_THROWS_AS(predicted_edges(m, db, 14, 10, EdgeSource::from_input), ValueError);
    m.shift_x = 7;
    CHECK_THROWS_AS(predicted_edges(m, db, 14, 10), DimensionError);
}
