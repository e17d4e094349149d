#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "exdeblur/convolve.hpp"
#include "exdeblur/fixtures.hpp"
#include "exdeblur/image_io.hpp"
#include "exdeblur/kernel.hpp"

using namespace exdeblur;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path d = [] {
        const fs::path p = fs::temp_directory_path() / "exdeblur_tests" / "cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

int run(const std::string& args) {
    const std::string cmd = std::string("cd '") + work_dir().string() + "' && '" + EXDEBLUR_CLI + "' " + args + " >cli.log 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
    return n;
}

// Writes a blurred 64x64 face plus its mask and sharp render.
void ensure_inputs() {
    static bool done = false;
    if (done) return;
    const auto p = fixtures::face_identity(0);
    const GrayImage sharp = fixtures::render_face(p, 64, 64);
    save_image(sharp, work_dir() / "sharp.png");
    save_mask(fixtures::face_mask(p, 64, 64), work_dir() / "mask.pgm");
    save_image(convolve_circular(sharp, fixtures::suite_kernels()[0]), work_dir() / "blurred.png");
    done = true;
}

const std::string fast = " --n-outer 3 --beta-max 1e3 --irls-iters 2";

}  // namespace

TEST_CASE("cli deblur in oracle-edges mode writes image, kernel and trace") {
    ensure_inputs();
    REQUIRE(run("deblur --mode oracle-edges --mask mask.pgm --kernel-size 15 -i blurred.png -o out.png --trace t.csv" + fast) == 0);
    const GrayImage out = load_image(work_dir() / "out.png");
    CHECK(out.width() == 64);
    CHECK(out.height() == 64);
    const BlurKernel k = read_kernel(work_dir() / "out.kern");
    CHECK(k.size() == 15);
    double sum = 0.0;
    for (double v : k.data()) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);
    CHECK(count_lines(work_dir() / "t.csv") == 4);
    CHECK(slurp(work_dir() / "t.csv").rfind("iteration,kernel_residual,objective\n", 0) == 0);
}

TEST_CASE("cli deblur is deterministic") {
    ensure_inputs();
    REQUIRE(run("deblur -i blurred.png -o a.png --kernel-out a.kern" + fast) == 0);
    REQUIRE(run("deblur -i blurred.png -o b.png --kernel-out b.kern" + fast) == 0);
    CHECK(slurp(work_dir() / "a.png") == slurp(work_dir() / "b.png"));
    CHECK(slurp(work_dir() / "a.kern") == slurp(work_dir() / "b.kern"));
}

TEST_CASE("cli usage errors exit 2 and runtime errors exit 1") {
    ensure_inputs();
    CHECK(run("deblur --mode cnn -i blurred.png -o x.png") == 2);
    CHECK(run("deblur --mode oracle-edges -i blurred.png -o x.png") == 2);
    CHECK(run("deblur -i blurred.png") == 2);
    CHECK(run("deblur --mode sideways -i blurred.png -o x.png") == 2);
    CHECK(run("nonsense") == 2);
    CHECK(run("deblur -i does_not_exist.png -o x.png") == 1);
    CHECK(run("deblur --mode cnn --weights does_not_exist.edn1 -i blurred.png -o x.png") == 1);
    CHECK(run("synth-kernel --seed 1 --size 12 -o x.kern") != 0);
}

TEST_CASE("cli config file sets defaults and flags win") {
    ensure_inputs();
    std::ofstream(work_dir() / "run.toml") << "n-outer = 3\nbeta-max = 1e3\nirls-iters = 1\n";
    REQUIRE(run("--config run.toml deblur -i blurred.png -o c.png --trace c.csv") == 0);
    CHECK(count_lines(work_dir() / "c.csv") == 4);
    REQUIRE(run("--config run.toml deblur -i blurred.png -o c.png --trace c.csv --n-outer 2") == 0);
    CHECK(count_lines(work_dir() / "c.csv") == 3);
    std::ofstream(work_dir() / "bad.toml") << "no-such-key = 1\n";
    CHECK(run("--config bad.toml deblur -i blurred.png -o c.png") == 2);
}

TEST_CASE("cli synth-kernel is deterministic and blur applies it") {
    ensure_inputs();
    REQUIRE(run("synth-kernel --seed 42 --size 21 -o k1.kern --pgm k1.pgm") == 0);
    REQUIRE(run("synth-kernel --seed 42 --size 21 -o k2.kern") == 0);
    CHECK(slurp(work_dir() / "k1.kern") == slurp(work_dir() / "k2.kern"));
    CHECK(read_kernel(work_dir() / "k1.kern").size() == 21);
    CHECK(fs::exists(work_dir() / "k1.pgm"));
    REQUIRE(run("blur -i sharp.png -k k1.kern -o kb.png") == 0);
    const GrayImage ours = load_image(work_dir() / "kb.png");
    const GrayImage ref = convolve_circular(load_image(work_dir() / "sharp.png"), read_kernel(work_dir() / "k1.kern"));
    CHECK(ours.same_shape(ref));
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ours.data()[i] - ref.data()[i]));
    CHECK(worst <= 1.0 / 255.0);
}

TEST_CASE("cli predict-edges on a constant image is flat") {
    save_image(GrayImage(40, 40, 0.5), work_dir() / "flat.png");
    REQUIRE(run("predict-edges --mode cnn --weights '" + (fs::path(EXDEBLUR_TEST_DATA) / "fixture_structure_net.edn1").string() +
                "' -i flat.png -o flat_edges.png") == 0);
    const GrayImage e = load_image(work_dir() / "flat_edges.png");
    CHECK(e.max() - e.min() <= 1.0 / 255.0);
}

TEST_CASE("cli keeps color inputs in color") {
    ensure_inputs();
    const GrayImage g = load_image(work_dir() / "blurred.png");
    RgbImage rgb{g, g, g};
    save_rgb(rgb, work_dir() / "color.png");
    REQUIRE(run("deblur -i color.png -o color_out.png" + fast) == 0);
    const RgbImage out = load_rgb(work_dir() / "color_out.png");
    CHECK(out.r.width() == 64);
    CHECK(is_color_file(work_dir() / "color_out.png"));
}

TEST_CASE("cli build-exemplars, synth-face and bench") {
    REQUIRE(run("synth-face --identity 2 --width 48 --height 48 -o f2.png --mask-out f2.pgm") == 0);
    REQUIRE(run("synth-face --identity 3 --width 48 --height 48 -o f3.png --mask-out f3.pgm") == 0);
    std::ofstream(work_dir() / "ex.tsv") << "f2.png\tf2.pgm\ttwo\nf3.png\tf3.pgm\tthree\n";
    REQUIRE(run("build-exemplars --manifest ex.tsv -o ex_summary.tsv") == 0);
    CHECK(count_lines(work_dir() / "ex_summary.tsv") >= 3);

    std::ofstream ds(work_dir() / "ds.tsv");
    for (int s = 0; s < 4; ++s) {
        REQUIRE(run("synth-kernel --seed " + std::to_string(s) + " --size 13 -o bk" + std::to_string(s) + ".kern") == 0);
        ds << "f2.png\tbk" << s << ".kern\t0.01\tf2.pgm\n";
        ds << "f3.png\tbk" << s << ".kern\t0.01\tf3.pgm\n";
    }
    ds.close();
    REQUIRE(run("bench --mode oracle-edges --dataset ds.tsv --records rec.csv --curve curve.csv --kernel-size 13" + fast) == 0);
    CHECK(count_lines(work_dir() / "rec.csv") == 9);
    CHECK(count_lines(work_dir() / "curve.csv") >= 2);
}
