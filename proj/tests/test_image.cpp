#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "tomo/image.hpp"

using namespace tomo;

TEST_CASE("phantom rejects tiny sizes") {
  CHECK_THROWS_AS(generate_shepp_logan(3), ConfigError);
}

TEST_CASE("corner pixels are outside every ellipse") {
  Image ph = generate_shepp_logan(64);
  CHECK(ph.at(0, 0) == 0.0);
  CHECK(ph.at(0, 63) == 0.0);
  CHECK(ph.at(63, 0) == 0.0);
  CHECK(ph.at(63, 63) == 0.0);
}

TEST_CASE("phantom matches brute-force ellipse sums at random pixels") {
  const int n = 128;
  Image ph = generate_shepp_logan(n);
  const auto& es = shepp_logan_ellipses();
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int i = pick(rng), j = pick(rng);
    const double x = -1.0 + (2.0 * j + 1.0) / n;
    const double y = -1.0 + (2.0 * i + 1.0) / n;
    double expected = 0.0;
    for (const auto& e : es)
      if (e.contains(x, y)) expected += e.intensity;
    CHECK(ph.at(i, j) == expected);
  }
}

TEST_CASE("phantom generation is deterministic") {
  Image a = generate_shepp_logan(64);
  Image b = generate_shepp_logan(64);
  CHECK(a.data == b.data);
}

TEST_CASE("2x2 downsampling of the 256 phantom tracks the 128 phantom") {
  Image fine = generate_shepp_logan(256);
  Image coarse = generate_shepp_logan(128);
  // The fine pixel centers of a 2x2 block straddle the coarse center, so
  // away from ellipse boundaries the average is exact.
  double max_abs = 0.0;
  int interior_checked = 0;
  const auto& es = shepp_logan_ellipses();
  for (int i = 0; i < 128; ++i) {
    for (int j = 0; j < 128; ++j) {
      const double avg = 0.25 * (fine.at(2 * i, 2 * j) + fine.at(2 * i, 2 * j + 1) +
                                 fine.at(2 * i + 1, 2 * j) + fine.at(2 * i + 1, 2 * j + 1));
      max_abs = std::max(max_abs, std::abs(avg - coarse.at(i, j)));
      // interior test: coarse pixel center at least 2 coarse pixels from
      // every ellipse boundary (probe the implicit ellipse equation).
      const double x = -1.0 + (2.0 * j + 1.0) / 128;
      const double y = -1.0 + (2.0 * i + 1.0) / 128;
      bool near_boundary = false;
      for (const auto& e : es) {
        const double c = std::cos(e.rotation), s = std::sin(e.rotation);
        const double xr = ((x - e.center_x) * c + (y - e.center_y) * s) / e.semi_axis_a;
        const double yr = (-(x - e.center_x) * s + (y - e.center_y) * c) / e.semi_axis_b;
        const double q = xr * xr + yr * yr;
        const double margin = 4.0 / (128.0 * std::min(e.semi_axis_a, e.semi_axis_b));
        if (std::abs(std::sqrt(q) - 1.0) < margin) near_boundary = true;
      }
      if (!near_boundary) {
        CHECK(avg == coarse.at(i, j));
        ++interior_checked;
      }
    }
  }
  // Boundary pixels can misclassify up to 2 of 4 fine samples across the
  // outer ellipse (step height 2.0), so the worst deviation is 1.0.
  CHECK(max_abs <= 1.0 + 1e-12);
  CHECK(interior_checked > 1000);
}

TEST_CASE("relative_l1_error basics") {
  Image u = generate_shepp_logan(32);
  CHECK(relative_l1_error(u, u) == 0.0);
  Image two(32, 2.0 * u.data);
  CHECK(relative_l1_error(two, u) == doctest::Approx(1.0).epsilon(1e-14));
  Image zero = Image::zero(32);
  CHECK(relative_l1_error(zero, u) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(relative_l1_error(u, zero), ConfigError);
}

TEST_CASE("relative_l1_error is scale covariant about the reference") {
  Image ref = generate_shepp_logan(32);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  Vector noise(ref.data.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = gauss(rng);
  Image u(32, ref.data + noise);
  const double base = relative_l1_error(u, ref);
  for (double s : {0.5, -1.0, 3.0}) {
    Image scaled(32, ref.data + s * (u.data - ref.data));
    CHECK(relative_l1_error(scaled, ref) ==
          doctest::Approx(std::abs(s) * base).epsilon(1e-12));
  }
}

TEST_CASE("image write/read round trip is bit exact") {
  Image ph = generate_shepp_logan(48);
  const std::string path = "test_img_roundtrip.pgm";
  write_image(ph, path);
  Image back = read_image(path);
  CHECK(back.n == ph.n);
  CHECK(back.data == ph.data);
  std::remove(path.c_str());
  std::remove((path + ".f64").c_str());
}

TEST_CASE("constant image produces a constant P5 payload") {
  Image c(8, Vector::Constant(64, 3.25));
  const std::string path = "test_img_const.pgm";
  write_image(c, path);
  std::ifstream is(path, std::ios::binary);
  std::string header;
  std::getline(is, header);
  CHECK(header == "P5");
  std::string dims, maxval;
  std::getline(is, dims);
  std::getline(is, maxval);
  CHECK(maxval == "65535");
  std::vector<unsigned char> buf(64 * 2);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  CHECK(is.gcount() == 128);
  for (size_t i = 2; i < buf.size(); i += 2) {
    CHECK(buf[i] == buf[0]);
    CHECK(buf[i + 1] == buf[1]);
  }
  std::remove(path.c_str());
  std::remove((path + ".f64").c_str());
}

TEST_CASE("reading a truncated sidecar is a structured error") {
  Image ph = generate_shepp_logan(16);
  const std::string path = "test_img_trunc.pgm";
  write_image(ph, path);
  // Truncate the sidecar mid-payload.
  {
    std::ifstream is(path + ".f64", std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
    std::ofstream os(path + ".f64", std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(read_image(path), IoError);
  std::remove(path.c_str());
  std::remove((path + ".f64").c_str());
}
