#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include <vector>

#include "dsvio/convex_set.hpp"
#include "dsvio/random.hpp"

using namespace dsvio;

namespace {

Vector random_vector(const RngStream& stream, std::uint64_t node, Index dim, double scale) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = scale * (2.0 * rng::uniform(stream, node, 0, static_cast<std::uint64_t>(i)) - 1.0);
  }
  return v;
}

std::vector<ConvexSet> set_variants(Index dim) {
  return {
      ConvexSet::WholeSpace(dim),
      ConvexSet::NonnegativeOrthant(dim),
      ConvexSet::Box(Vector::Constant(dim, -0.5), Vector::Constant(dim, 2.0)),
      ConvexSet::ScaledSymmetricBox(1.5, dim),
  };
}

}  // namespace

TEST_CASE("factories validate their inputs") {
  CHECK_THROWS_AS(ConvexSet::Box((Vector(2) << 1.0, 0.0).finished(),
                                 (Vector(2) << 0.0, 1.0).finished()),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConvexSet::Box(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(ConvexSet::ScaledSymmetricBox(-1.0, 2), std::invalid_argument);
  CHECK_NOTHROW(ConvexSet::Box(Vector::Zero(2), Vector::Zero(2)));
}

TEST_CASE("projection worked examples") {
  const Vector z = (Vector(2) << -1.0, 2.0).finished();

  CHECK(bitwise_equal(project(ConvexSet::WholeSpace(2), z), z));

  const Vector onto_orthant = project(ConvexSet::NonnegativeOrthant(2), z);
  CHECK(onto_orthant[0] == 0.0);
  CHECK(onto_orthant[1] == 2.0);

  const auto box = ConvexSet::Box((Vector(2) << 0.0, 0.0).finished(),
                                  (Vector(2) << 1.0, 1.0).finished());
  const Vector onto_box = project(box, z);
  CHECK(onto_box[0] == 0.0);
  CHECK(onto_box[1] == 1.0);

  const Vector onto_sym = project(ConvexSet::ScaledSymmetricBox(1.5, 2), z);
  CHECK(onto_sym[0] == -1.0);
  CHECK(onto_sym[1] == 1.5);
}

TEST_CASE("distance and membership") {
  const auto orthant = ConvexSet::NonnegativeOrthant(2);
  const Vector z = (Vector(2) << -3.0, 4.0).finished();
  CHECK(distance(orthant, z) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(contains(orthant, Vector::Zero(2)));
  CHECK_FALSE(contains(orthant, z));
  CHECK(contains(orthant, (Vector(2) << -1e-9, 0.0).finished(), 1e-8));
  CHECK_THROWS_AS(project(orthant, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("projection axioms over random points") {
  const RngStream stream{20240817, 1};
  const Index dim = 4;
  std::uint64_t node = 0;
  for (const auto& set : set_variants(dim)) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = random_vector(stream, node++, dim, 5.0);
      const Vector y = random_vector(stream, node++, dim, 5.0);
      const Vector px = project(set, x);
      const Vector py = project(set, y);

      // idempotence, exactly
      CHECK(bitwise_equal(project(set, px), px));
      // fixed point on members
      CHECK(contains(set, px, 0.0));
      // nonexpansiveness
      CHECK((px - py).norm() <= (x - y).norm() + 1e-15);
      // variational characterization: (x - px) . (q - px) <= 0 for feasible q
      CHECK((x - px).dot(py - px) <= 1e-10);
    }
  }
}
