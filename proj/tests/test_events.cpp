#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "mutomo/error.hpp"
#include "mutomo/events.hpp"

using namespace mutomo;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_down(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  Vec3 d;
  do {
    d = {g(rng), g(rng), -std::abs(g(rng))};
  } while (d.z > -1e-3);
  return normalized(d);
}

MuonEvent random_event(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-50, 50);
  return {std::uniform_real_distribution<double>(0, 1e4)(rng),
          {{u(rng), u(rng), 30.0}, random_down(rng)},
          {{u(rng), u(rng), -30.0}, random_down(rng)}};
}

EventDataset random_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EventDataset d;
  d.orientation = 1.2345;
  for (std::size_t i = 0; i < n; ++i) d.events.push_back(random_event(rng));
  return d;
}

DecodeErrorKind decode_kind(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_events(in);
  } catch (const DecodeError& e) {
    return e.kind();
  }
  FAIL("no decode error");
  return DecodeErrorKind::io;
}

std::string to_bytes(const EventDataset& d) {
  std::ostringstream out;
  write_events(out, d);
  return out.str();
}

// Arbitrary rotation from an axis-angle pair (Rodrigues).
Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
  const Vec3 k = normalized(axis);
  return v * std::cos(angle) + cross(k, v) * std::sin(angle) + k * (dot(k, v) * (1 - std::cos(angle)));
}

}  // namespace

TEST_CASE("scattering angle examples") {
  const Vec3 down{0, 0, -1};
  CHECK(scattering_angle(down, down) == 0.0);
  CHECK(scattering_angle(down, {std::sin(kPi / 6), 0, -std::cos(kPi / 6)}) == doctest::Approx(kPi / 6).epsilon(1e-14));
  CHECK(scattering_angle(down, {0, 0, 1}) == doctest::Approx(kPi).epsilon(1e-15));
}

TEST_CASE("scattering angle agrees with the clamped arccos form") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a = random_down(rng), b = random_down(rng);
    const double c = std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0);
    CHECK(std::abs(scattering_angle(a, b) - std::acos(c)) < 1e-7);
    const double t = scattering_angle(a, b);
    CHECK(t >= 0.0);
    CHECK(t <= kPi);
  }
}

TEST_CASE("scattering angle symmetry and rotation invariance") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  for (int i = 0; i < 5000; ++i) {
    const Vec3 a = random_down(rng), b = random_down(rng);
    const Vec3 axis{g(rng), g(rng), g(rng)};
    const double ang = g(rng) * 3;
    CHECK(scattering_angle(a, b) == scattering_angle(b, a));
    CHECK(std::abs(scattering_angle(rotate(a, axis, ang), rotate(b, axis, ang)) - scattering_angle(a, b)) < 1e-9);
  }
}

TEST_CASE("project_track uses only the top module") {
  MuonEvent e{0.0, {{10, 0, 30}, {0, 0, -1}}, {{10, 0, -30}, {0, 0, -1}}};
  Ray r = project_track(e);
  CHECK(r.at(30).x == 10.0);
  CHECK(r.at(30).z == 0.0);

  e.top = {{0, 0, 30}, {0.1, 0, -0.994987}};
  r = project_track(e);
  const double t = 30 / 0.994987;
  CHECK(r.at(t).x == doctest::Approx(3.015).epsilon(1e-4));
  CHECK(std::abs(r.at(t).z) < 1e-12);

  MuonEvent other = e;
  other.bottom = {{-7, 3, -30}, normalized(Vec3{0.3, 0.2, -1})};
  const Ray r2 = project_track(other);
  CHECK(r2.origin == r.origin);
  CHECK(r2.direction == r.direction);
}

TEST_CASE("drum-frame rotation") {
  const MuonEvent e{2.5, {{0, 10, 0}, {0, 0, -1}}, {{1, 2, -30}, normalized(Vec3{0.1, 0.2, -1})}};
  CHECK(to_drum_frame(e, 0.0) == e);
  const MuonEvent d = to_drum_frame(e, kPi / 2);
  CHECK(d.timestamp == 2.5);
  CHECK(d.top.position.x == 0.0);
  CHECK(std::abs(d.top.position.y) < 1e-14);
  CHECK(d.top.position.z == doctest::Approx(-10.0).epsilon(1e-14));

  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const MuonEvent x = random_event(rng);
    const double eps = 1e-3 * (i + 1);
    // Rotating by 2pi - eps then by eps composes to a full turn.
    const MuonEvent back = to_drum_frame(to_drum_frame(x, 2 * kPi - eps), eps);
    CHECK(norm(back.top.position - x.top.position) < 1e-9);
    CHECK(norm(back.bottom.direction - x.bottom.direction) < 1e-9);

    const MuonEvent r = to_drum_frame(x, std::uniform_real_distribution<double>(0, 2 * kPi)(rng));
    CHECK(std::abs(norm(r.top.direction) - norm(x.top.direction)) < 1e-12);
    CHECK(std::abs(norm(r.bottom.position) - norm(x.bottom.position)) < 1e-12 * norm(x.bottom.position));
    CHECK(std::abs(dot(r.top.direction, r.bottom.direction) - dot(x.top.direction, x.bottom.direction)) < 1e-12);
  }
}

TEST_CASE("wrap_orientation") {
  CHECK(wrap_orientation(0.0) == 0.0);
  CHECK(wrap_orientation(2 * kPi) == 0.0);
  CHECK(wrap_orientation(-kPi / 2) == doctest::Approx(3 * kPi / 2));
  CHECK(wrap_orientation(5 * kPi) == doctest::Approx(kPi));
}

TEST_CASE("event validation") {
  MuonEvent e{0.0, {{0, 0, 30}, {0, 0, -1}}, {{0, 0, -30}, {0, 0, -1}}};
  CHECK_NOTHROW(validate_event(e));
  MuonEvent up = e;
  up.bottom.direction = {0, 0, 1};
  CHECK_THROWS_AS(validate_event(up), InvalidArgument);
  MuonEvent scaled = e;
  scaled.top.direction = {0, 0, -1.01};
  CHECK_THROWS_AS(validate_event(scaled), InvalidArgument);
  MuonEvent swapped = e;
  std::swap(swapped.top.position, swapped.bottom.position);
  CHECK_THROWS_AS(validate_event(swapped), InvalidArgument);
}

TEST_CASE("binary round trip is bit-exact and order-preserving") {
  const EventDataset d = random_dataset(1000, 1);
  const std::string bytes = to_bytes(d);
  CHECK(bytes.size() == 40 + 104 * d.events.size());
  CHECK(bytes.substr(0, 8) == "MUTOMO01");
  std::istringstream in(bytes);
  const EventDataset back = read_events(in);
  CHECK(back.same_data(d));
  for (std::size_t i = 0; i < d.events.size(); ++i) {
    CHECK(std::memcmp(&back.events[i].timestamp, &d.events[i].timestamp, sizeof(double)) == 0);
  }
  CHECK(to_bytes(back) == bytes);
}

TEST_CASE("empty dataset round trips") {
  EventDataset d;
  d.orientation = 0.0;
  const std::string bytes = to_bytes(d);
  CHECK(bytes.size() == 40);
  std::istringstream in(bytes);
  CHECK(read_events(in).same_data(d));
}

TEST_CASE("writer rejects invalid datasets") {
  EventDataset d = random_dataset(3, 2);
  d.orientation = 2 * kPi;
  std::ostringstream out;
  CHECK_THROWS_AS(write_events(out, d), InvalidArgument);
  d.orientation = 0.0;
  d.events[1].top.direction.z = 0.5;
  CHECK_THROWS_AS(write_events(out, d), InvalidArgument);
}

TEST_CASE("decode errors are distinct") {
  const std::string good = to_bytes(random_dataset(5, 3));

  std::string magic = good;
  magic[0] ^= 0x01;
  CHECK(decode_kind(magic) == DecodeErrorKind::bad_magic);

  CHECK(decode_kind(good.substr(0, good.size() - 1)) == DecodeErrorKind::truncated);
  CHECK(decode_kind(good.substr(0, good.size() - 104)) == DecodeErrorKind::truncated);
  CHECK(decode_kind(good.substr(0, 20)) == DecodeErrorKind::truncated);
  CHECK(decode_kind(good + std::string(104, '\0')) == DecodeErrorKind::count_mismatch);
  CHECK(decode_kind(good + "x") == DecodeErrorKind::count_mismatch);

  std::string version = good;
  version[8] = 2;
  CHECK(decode_kind(version) == DecodeErrorKind::bad_version);

  std::string nan = good;
  const double q = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(&nan[40 + 104 * 2 + 8 * 4], &q, 8);
  CHECK(decode_kind(nan) == DecodeErrorKind::nan_field);
}

TEST_CASE("csv round trip is exact") {
  const EventDataset d = random_dataset(500, 6);
  std::ostringstream out;
  write_events_csv(out, d);
  const std::string text = out.str();
  CHECK(text.rfind("t,x1,y1,z1,cx1,cy1,cz1,x2,y2,z2,cx2,cy2,cz2\n", 0) == 0);
  std::istringstream in(text);
  CHECK(read_events_csv(in) == d.events);

  std::istringstream bad("t,x1\n");
  CHECK_THROWS_AS(read_events_csv(bad), DecodeError);
  std::istringstream short_row("t,x1,y1,z1,cx1,cy1,cz1,x2,y2,z2,cx2,cy2,cz2\n1,2,3\n");
  CHECK_THROWS_AS(read_events_csv(short_row), DecodeError);
  std::istringstream nan_row("t,x1,y1,z1,cx1,cy1,cz1,x2,y2,z2,cx2,cy2,cz2\n1,2,3,4,5,6,nan,8,9,10,11,12,13\n");
  CHECK_THROWS_AS(read_events_csv(nan_row), DecodeError);
}
