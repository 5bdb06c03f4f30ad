#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "pinr/cli.hpp"
#include "pinr/image.hpp"
#include "pinr/model_io.hpp"

using namespace pinr;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"pinr"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pinr_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("cli: psnr of identical images is inf") {
  const fs::path a = scratch("flat.png");
  save_png(ImageGrid(8, 8, 3, 0.25), a);
  const Run r = run({"psnr", a.string(), a.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "inf\n");
}

TEST_CASE("cli: info lists the default six-stage layout") {
  const fs::path m = scratch("table.pinr");
  REQUIRE(run({"init", "--out", m.string(), "--seed", "1"}).code == 0);
  const Run r = run({"info", "--model", m.string()});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("stages 6,", 0) == 0);
  std::getline(lines, line);
  std::vector<std::size_t> widths;
  for (int s = 0; s < 6; ++s) {
    std::getline(lines, line);
    std::istringstream row(line);
    std::size_t stage = 0, freqs = 0;
    std::string band;
    row >> stage >> band >> freqs;
    CHECK(stage == static_cast<std::size_t>(s));
    widths.push_back(freqs);
  }
  CHECK(widths == std::vector<std::size_t>{24, 48, 80, 192, 384, 1024});
}

TEST_CASE("cli: sampling a larger domain tiles the base sample") {
  const fs::path m = scratch("small.pinr");
  REQUIRE(run({"init", "--out", m.string(), "--bands", "3,8", "--widths", "12,40", "--hidden", "16",
               "--seed", "4"})
              .code == 0);
  const fs::path small = scratch("small.png"), large = scratch("large.png");
  REQUIRE(run({"sample", "--model", m.string(), "--domain", "-1", "-1", "1", "1", "--res", "256",
               "--out", small.string()})
              .code == 0);
  REQUIRE(run({"sample", "--model", m.string(), "--domain", "-2", "-2", "2", "2", "--res", "512",
               "--out", large.string()})
              .code == 0);
  const ImageGrid a = load_png(small), b = load_png(large);
  // Cell centers of the 512 grid sit half a tile away from the 256 grid's.
  const ImageGrid tiled = roll(tile(a, 2, 2), 128, 128);
  REQUIRE(tiled.same_shape(b));
  double worst = 0.0;
  for (std::size_t k = 0; k < b.data.size(); ++k) worst = std::max(worst, std::abs(tiled.data[k] - b.data[k]));
  CHECK(worst <= 1.0 / 255.0 + 1e-12);
}

TEST_CASE("cli: seeded commands are reproducible") {
  const fs::path img = scratch("tex.png");
  ImageGrid tex(32, 32, 3);
  for (std::size_t i = 0; i < 32; ++i) {
    for (std::size_t j = 0; j < 32; ++j) {
      for (std::size_t c = 0; c < 3; ++c) tex.at(i, j, c) = 0.5 + 0.3 * std::sin(0.2 * (i + 2 * j + c));
    }
  }
  save_png(tex, img);
  for (const char* cmd : {"fit", "seamless"}) {
    std::vector<std::string> files;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = scratch(std::string(cmd) + std::to_string(rep) + ".pinr");
      const Run r = run({cmd, "--image", img.string(), "--out", out.string(), "--bands", "2,4",
                         "--widths", "6,16", "--hidden", "8", "--epochs", "2", "--batch", "256",
                         "--lr", "1e-3", "--seed", "9"});
      REQUIRE(r.code == 0);
      CHECK(r.err.find("seed=9") != std::string::npos);
      files.push_back(slurp(out));
    }
    CHECK(files[0] == files[1]);
  }
  const fs::path m1 = scratch("mask1.png"), m2 = scratch("mask2.png");
  for (const fs::path& p : {m1, m2}) {
    REQUIRE(run({"mask", "--mask", "periodic", "--res", "16", "--seed", "2", "--out", p.string()})
                .code == 0);
  }
  CHECK(slurp(m1) == slurp(m2));
}

TEST_CASE("cli: config file sits between defaults and flags") {
  const fs::path cfg = scratch("recipe.cfg");
  {
    std::ofstream f(cfg);
    f << "# recipe\n\nbands = 2,5\nwidths = 4 12\nseed=7\n";
  }
  const fs::path a = scratch("cfg_a.pinr"), b = scratch("cfg_b.pinr"), c = scratch("cfg_c.pinr");
  Run r = run({"init", "--config", cfg.string(), "--out", a.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("seed=7") != std::string::npos);
  CHECK(load_model(a).size() == 2);
  r = run({"init", "--config", cfg.string(), "--seed", "8", "--out", b.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("seed=8") != std::string::npos);
  REQUIRE(run({"init", "--bands", "2,5", "--widths", "4,12", "--seed", "7", "--out", c.string()}).code ==
          0);
  CHECK(slurp(a) == slurp(c));
  CHECK(slurp(a) != slurp(b));

  {
    std::ofstream f(cfg);
    f << "learning_rate = 3\n";
  }
  CHECK(run({"init", "--config", cfg.string(), "--out", a.string()}).code == 2);
}

TEST_CASE("cli: help and usage errors") {
  for (const char* cmd : {"fit", "seamless", "sample", "psnr", "mask", "poisson-baseline",
                          "render-torus", "info", "init"}) {
    const Run r = run({cmd, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
  CHECK(run({"sample", "--help"}).out.find("[-1,-1,1,1]") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"mask", "--out", scratch("m.png").string(), "--bogus"}).code == 2);
  CHECK(run({"mask", "--out", scratch("m.png").string(), "--mask", "square"}).code == 2);
  CHECK(run({"info", "--model", "/nonexistent/model.pinr"}).code != 0);
  CHECK(run({"init", "--out", scratch("x.pinr").string(), "--bands", "3,2"}).code == 1);
  CHECK(run({"init", "--out", scratch("x.pinr").string(), "--bands", "3,5", "--widths", "8"}).code == 2);

  const fs::path junk = scratch("junk.pinr");
  {
    std::ofstream f(junk);
    f << "not a model";
  }
  const Run r = run({"info", "--model", junk.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("cli: baseline and torus render write images") {
  const fs::path img = scratch("ramp.png"), out = scratch("ramp_tile.png");
  ImageGrid ramp(16, 16, 3);
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      for (std::size_t c = 0; c < 3; ++c) ramp.at(i, j, c) = (i + j) / 30.0;
    }
  }
  save_png(ramp, img);
  for (const char* mode : {"torus", "average-border"}) {
    const Run r = run({"poisson-baseline", "--image", img.string(), "--out", out.string(), "--mode", mode});
    CHECK(r.code == 0);
    CHECK(load_png(out).width == 16);
  }
  const fs::path m = scratch("torus.pinr"), png = scratch("torus.png");
  REQUIRE(run({"init", "--out", m.string(), "--bands", "2,4", "--widths", "6,16", "--hidden", "8"}).code == 0);
  const Run r = run({"render-torus", "--model", m.string(), "--out", png.string(), "--res", "48", "32"});
  CHECK(r.code == 0);
  CHECK(r.out.find("surface pixels") != std::string::npos);
  CHECK(run({"render-torus", "--model", m.string(), "--out", png.string(), "--eye", "2", "0", "0.1"}).code ==
        1);
}
