#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "lvsem/mixing.hpp"
#include "lvsem/simgen.hpp"

using namespace lvsem;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::vector<CanonicalModel> generated(std::size_t count, std::uint64_t base) {
  std::vector<CanonicalModel> out;
  for (std::uint64_t s = 0; out.size() < count; ++s) {
    try {
      out.push_back(generate_model(fx::recovery_config(base + s)));
    } catch (const GeneratorError&) {
    }
  }
  return out;
}

}  // namespace

TEST_CASE("running example W* and W") {
  const double b2 = 0.7, a21 = -1.3, b3 = 2.0;
  const auto m = fx::running_example(b2, a21, b3);
  const auto ws = build_w_star(m);
  CHECK(ws.row_labels == std::vector<std::string>{"X2", "X1", "Y3"});
  CHECK(ws.col_labels == std::vector<std::string>{"N_H", "N_Z1", "N_Y3"});
  CHECK(ws.row_variables == std::vector<std::string>{"Z2", "Z1", "Y3"});
  CHECK(ws.observability ==
        std::vector<Observability>{Observability::Measured, Observability::Measured, Observability::Observed});
  CHECK(ws.values.isApprox(mat({{b2, a21, 0}, {0, 1, 0}, {b3, 0, 1}})));

  const auto w = build_w(m);
  CHECK(w.col_labels == std::vector<std::string>{"N_H", "N_Z1", "N_Y3", "N_X2", "N_X1"});
  CHECK(w.values.isApprox(mat({{b2, a21, 0, 1, 0}, {0, 1, 0, 0, 1}, {b3, 0, 1, 0, 0}})));

  const auto sp = support(ws, 1e-9);
  Eigen::Matrix<bool, 3, 3> expected;
  expected << true, true, false, false, true, false, true, false, true;
  CHECK(sp.mask == expected);
  CHECK(sp.row_counts == std::vector<std::size_t>{2, 1, 2});
  CHECK(sp.col_counts == std::vector<std::size_t>{2, 2, 1});
}

TEST_CASE("D1 W* and W") {
  const auto m = fx::d1();
  const auto ws = build_w_star(m);
  CHECK(ws.values.isApprox(mat({{2, 0}, {1, 0}, {3, 1}})));
  const auto w = build_w(m);
  CHECK(w.values.isApprox(mat({{2, 0, 1, 0}, {1, 0, 0, 1}, {3, 1, 0, 0}})));
  CHECK(w.col_labels.back() == "N_X1");

  Eigen::Matrix<bool, 3, 2> expected;
  expected << true, false, true, false, true, true;
  CHECK(support(ws, 1e-9).mask == expected);
}

TEST_CASE("mixing through a cogent chain") {
  // Y1 -> Y2 -> Y3: (I - C)^{-1} carries the path product.
  CanonicalModel m;
  auto a = m.add_observed("Y1"), b = m.add_observed("Y2"), c = m.add_observed("Y3");
  m.add_edge(a, b, 2.0);
  m.add_edge(b, c, -0.5);
  CHECK(build_w_star(m).values.isApprox(mat({{1, 0, 0}, {2, 1, 0}, {-1, -0.5, 1}})));
}

TEST_CASE("support of a zero matrix") {
  const auto sp = support(Eigen::MatrixXd::Zero(2, 3), 1e-9);
  CHECK_FALSE(sp.mask.any());
  CHECK(sp.row_counts == std::vector<std::size_t>{0, 0});
}

TEST_CASE("strip") {
  const auto m = fx::running_example();
  const auto r = strip_measurement_columns(build_w(m), 1e-9);
  CHECK(r.removed == std::vector<std::size_t>{3, 4});
  CHECK_FALSE(r.already_stripped);
  CHECK((r.matrix.values - build_w_star(m).values).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.matrix.col_labels == build_w_star(m).col_labels);

  SUBCASE("already stripped input passes through") {
    const auto again = strip_measurement_columns(r.matrix, 1e-9);
    CHECK(again.already_stripped);
    CHECK(again.matrix.values == r.matrix.values);
  }
  SUBCASE("one-hot column missing for one measured row") {
    auto w = build_w(m);
    w.values.col(3).setZero();
    w.values(0, 3) = 0.0;
    w.values(2, 3) = 1.0;  // now hits Y3, which is observed
    CHECK_THROWS_AS(strip_measurement_columns(w, 1e-9), MixingError);
  }
  SUBCASE("two one-hot columns on one row") {
    auto w = build_w(m);
    Eigen::MatrixXd wider(3, 6);
    wider << w.values, Eigen::Vector3d(0, 1, 0);
    w.values = wider;
    w.col_labels.push_back("extra");
    const auto amb = strip_measurement_columns(w, 1e-9);
    CHECK(amb.ambiguous_rows == std::vector<std::size_t>{1});
  }
  SUBCASE("observability must cover all rows") {
    auto w = build_w(m);
    w.observability.pop_back();
    CHECK_THROWS_AS(strip_measurement_columns(w, 1e-9), MixingError);
  }
}

TEST_CASE("matching up to permutation and scaling") {
  const auto a = mat({{1, 2, 0}, {0, 1, 3}});
  const auto b = mat({{0, -2, 4}, {6, -1, 0}});  // cols (c2*2, c1*-1, c0*4)
  const auto r = match_up_to_permutation_scaling(a, b, 1e-9);
  REQUIRE(r);
  CHECK(r->permutation == std::vector<std::size_t>{2, 1, 0});
  CHECK(r->scales[0] == doctest::Approx(4.0));
  CHECK(r->scales[1] == doctest::Approx(-1.0));
  CHECK(r->scales[2] == doctest::Approx(2.0));
  CHECK_FALSE(match_up_to_permutation_scaling(a, mat({{1, 2, 1}, {0, 1, 3.5}}), 1e-9));
  CHECK_THROWS_AS(match_up_to_permutation_scaling(a, mat({{1, 2}, {0, 1}}), 1e-9), MixingError);
}

TEST_CASE("matching aligns rows by label") {
  const auto m = fx::running_example();
  auto w = build_w_star(m);
  auto flipped = w;
  flipped.values.row(0).swap(flipped.values.row(2));
  std::swap(flipped.row_labels[0], flipped.row_labels[2]);
  CHECK(match_up_to_permutation_scaling(w, flipped, 1e-9));
  CHECK(align_rows(w, {"Y3", "X1", "X2"})->values.row(0) == w.values.row(2));
  CHECK_FALSE(align_rows(w, {"Y3", "X1", "X9"}));
}

TEST_CASE("canonical column form") {
  const auto w = build_w_star(fx::running_example());
  std::mt19937_64 rng(4);
  const auto a = canonical_column_form(w, 1e-9);
  const auto b = canonical_column_form(fx::shuffle_scale(w, rng), 1e-9);
  CHECK(a.values.isApprox(b.values));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    Eigen::Index i = 0;
    while (std::abs(a.values(i, j)) <= 1e-9) ++i;
    CHECK(a.values(i, j) == doctest::Approx(1.0));
  }
  auto z = w;
  z.values.col(1).setZero();
  CHECK_THROWS_AS(canonical_column_form(z, 1e-9), MixingError);
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("property: strip(build_w) == build_w_star") {
  for (const auto& m : generated(120, 10)) {
    const auto r = strip_measurement_columns(build_w(m), 1e-9);
    const auto ws = build_w_star(m);
    REQUIRE(r.matrix.values.cols() == ws.values.cols());
    CHECK((r.matrix.values - ws.values).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.matrix.col_labels == ws.col_labels);
    CHECK(r.ambiguous_rows.empty());
  }
}

TEST_CASE("property: W* has unit cogent diagonal") {
  for (const auto& m : generated(80, 400)) {
    const auto ws = build_w_star(m);
    for (auto c : m.cogent()) {
      const auto r = static_cast<Eigen::Index>(*ws.row_of(m.row_label(c)));
      const auto k = static_cast<Eigen::Index>(*ws.col_of(noise_label(m.name(c))));
      CHECK(ws.values(r, k) == 1.0);
    }
  }
}

TEST_CASE("property: matching is an equivalence relation") {
  std::mt19937_64 rng(77);
  for (const auto& m : generated(80, 900)) {
    const auto a = build_w_star(m);
    const auto b = fx::shuffle_scale(a, rng);
    const auto c = fx::shuffle_scale(b, rng);
    CHECK(match_up_to_permutation_scaling(a.values, a.values, 1e-9));
    const auto ab = match_up_to_permutation_scaling(a.values, b.values, 1e-9);
    const auto ba = match_up_to_permutation_scaling(b.values, a.values, 1e-9);
    REQUIRE(ab);
    REQUIRE(ba);
    CHECK(match_up_to_permutation_scaling(a.values, c.values, 1e-9));
    // The reported mapping reproduces b.
    for (std::size_t j = 0; j < ab->permutation.size(); ++j)
      CHECK((a.values.col(static_cast<Eigen::Index>(j)) * ab->scales[j])
                .isApprox(b.values.col(static_cast<Eigen::Index>(ab->permutation[j]))));
  }
}

TEST_CASE("property: canonical column form is idempotent") {
  std::mt19937_64 rng(91);
  for (const auto& m : generated(80, 1300)) {
    const auto once = canonical_column_form(fx::shuffle_scale(build_w(m), rng), 1e-9);
    const auto twice = canonical_column_form(once, 1e-9);
    CHECK(once.values.isApprox(twice.values));
    CHECK(once.col_labels == twice.col_labels);
  }
}
