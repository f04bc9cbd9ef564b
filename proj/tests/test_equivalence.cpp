#include <doctest.h>

#include "fixtures.hpp"
#include "lvsem/equivalence.hpp"
#include "lvsem/mixing.hpp"
#include "lvsem/recovery.hpp"
#include "lvsem/simgen.hpp"

using namespace lvsem;

namespace {

// H -> Z1 -> Z2 (mleaf) and H -> Z2: one group holding a measured cogent
// variable, an mleaf and a confounder.
CanonicalModel three_member_group() {
  CanonicalModel m;
  auto h = m.add_unobserved("H");
  auto z1 = m.add_measured("Z1", "X1", false);
  auto z2 = m.add_measured("Z2", "X2", true);
  m.add_edge(h, z1, 0.9);
  m.add_edge(z1, z2, 1.4);
  m.add_edge(h, z2, -0.7);
  return m;
}

// H -> Y1, H -> Y2, Y1 -> Y2, with a root Y0 -> Y1.
CanonicalModel latent_in_group() {
  CanonicalModel m;
  auto y0 = m.add_observed("Y0");
  auto h = m.add_unobserved("H");
  auto y1 = m.add_observed("Y1");
  auto y2 = m.add_observed("Y2");
  m.add_edge(y0, y1, 1.2);
  m.add_edge(h, y1, 0.8);
  m.add_edge(h, y2, -1.1);
  m.add_edge(y1, y2, 0.6);
  return m;
}

}  // namespace

TEST_CASE("switching the D1 center") {
  const auto m = fx::d1();
  const auto r = switch_center_detailed(m, m.id_of("Z1"), m.id_of("Z2"), std::nullopt);
  const auto& s = r.model;
  CHECK(r.cancellations.empty());
  CHECK(s.kind(s.id_of("Z2")) == VariableKind::MeasuredCogent);
  CHECK(s.kind(s.id_of("Z1")) == VariableKind::Mleaf);
  CHECK(s.edges().size() == 2);
  CHECK(s.weight(s.id_of("Z2"), s.id_of("Z1")) == doctest::Approx(0.5));
  CHECK(s.weight(s.id_of("Z2"), s.id_of("Y3")) == doctest::Approx(1.5));
  CHECK(validate_canonical(s).empty());
  CHECK(models_equal_mixing(m, s));
  CHECK(same_unlabeled_structure(m, s));
}

TEST_CASE("switching noise with a confounder") {
  const auto m = latent_in_group();
  const auto g = compute_aog(m);
  const auto h = m.id_of("H"), y1 = m.id_of("Y1");
  REQUIRE(std::any_of(g.groups.begin(), g.groups.end(), [&](const Group& grp) {
    return grp.center == y1 && grp.noises == std::vector<std::size_t>{h, y1};
  }));
  const auto s = switch_center(m, y1, std::nullopt, h);
  CHECK(validate_canonical(s).empty());
  CHECK(models_equal_mixing(m, s));
  CHECK(fx::group_members(compute_aog(s)) == fx::group_members(g));
  // The confounder now reaches Y2 only through Y1's old parents' path terms.
  CHECK(s.has_edge(h, y1));
}

TEST_CASE("switch_center validates its arguments") {
  const auto m = fx::running_example();
  CHECK_THROWS(switch_center(m, m.id_of("Z1"), m.id_of("Z2")));
  CHECK_THROWS(switch_center(m, m.id_of("Y3"), std::nullopt, m.id_of("H")));
  const auto d = fx::d1();
  CHECK_THROWS(switch_center(d, d.id_of("Z2"), d.id_of("Z1")));
}

TEST_CASE("equivalent model counts") {
  const auto e = fx::running_example();
  const auto ex = enumerate_equivalents(e, compute_aog(e));
  REQUIRE(ex.size() == 1);
  CHECK(ex[0] == e);
  const auto d = fx::d1();
  CHECK(enumerate_equivalents(d, compute_aog(d)).size() == 2);
  const auto t = three_member_group();
  REQUIRE(compute_aog(t).groups.size() == 1);
  const auto all = enumerate_equivalents(t, compute_aog(t));
  CHECK(all.size() == 4);
  for (const auto& m : all) {
    CHECK(validate_canonical(m).empty());
    CHECK(models_equal_mixing(m, t));
  }
}

TEST_CASE("fewest edges under switching") {
  const auto m = fx::aog_not_dog();
  const auto s = switch_center(m, m.id_of("Z1"), m.id_of("Z2"));
  CHECK(models_equal_mixing(m, s));
  CHECK(s.edges().size() == m.edges().size() + 1);
}

TEST_CASE("latent reduction") {
  for (const auto& m : fx::non_minimal_fixtures()) {
    const auto w = is_minimal(m).witness;
    REQUIRE(w);
    const auto r = reduce_latent_detailed(m, w->latent, w->mleaf);
    CHECK(r.model.unobserved().size() + 1 == m.unobserved().size());
    CHECK(validate_canonical(r.model).empty());
    CHECK(models_equal_mixing(m, r.model));
    CHECK(r.model.kind(r.model.id_of(m.name(w->mleaf))) == VariableKind::MeasuredCogent);
  }
  const auto e = fx::running_example();
  CHECK_THROWS(reduce_latent(e, e.id_of("H"), e.id_of("Z2")));
}

TEST_CASE("latent reduction of a two-child confounder") {
  // Y1 = 3 H = 1.5 Z9 once Z9 carries the confounder's noise.
  CanonicalModel m;
  auto h = m.add_unobserved("H");
  auto z = m.add_measured("Z9", "X9", true);
  auto y = m.add_observed("Y1");
  m.add_edge(h, z, 2.0);
  m.add_edge(h, y, 3.0);
  const auto r = reduce_latent_detailed(m, h, z);
  CHECK(r.cancellations.empty());
  CHECK(r.model.weight(r.model.id_of("Z9"), r.model.id_of("Y1")) == doctest::Approx(1.5));
  CHECK(models_equal_mixing(m, r.model));
}

TEST_CASE("structure comparison") {
  const auto d = fx::d1();
  CHECK(same_unlabeled_structure(d, d));
  CHECK_FALSE(same_unlabeled_structure(d, fx::running_example()));
  const auto w = build_w_star(d);
  const auto cls = enumerate_class(w, recover_aog(w, 1e-9).grouping, 1e-9);
  REQUIRE(cls.models.size() == 2);
  CHECK(same_unlabeled_structure(to_model(cls.models[0]), to_model(cls.models[1])));
  CHECK(same_unlabeled_structure(fx::aog_not_dog(), fx::aog_not_dog(0.3, 0.4, 0.5, 0.6)));
}

TEST_CASE("latent scaling comparison") {
  CHECK(equal_up_to_latent_scaling(fx::running_example(0.7, -1.3, 2.0), fx::running_example(1.4, -1.3, 4.0), 1e-9));
  CHECK_FALSE(equal_up_to_latent_scaling(fx::running_example(0.7, -1.3, 2.0), fx::running_example(1.4, -1.3, 2.0), 1e-9));
  CHECK_FALSE(equal_up_to_latent_scaling(fx::running_example(), fx::running_example(0.7, -1.2, 2.0), 1e-9));
  CHECK_FALSE(models_equal_mixing(fx::running_example(), fx::running_example(0.7, -1.2, 2.0)));
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("property: center switching preserves mixing and groups") {
  std::size_t n = 0, switched = 0;
  for (std::uint64_t s = 0; n < 60; ++s) {
    CanonicalModel m;
    try {
      m = generate_model(fx::recovery_config(90000 + s));
    } catch (const GeneratorError&) {
      continue;
    }
    ++n;
    const auto aog = compute_aog(m);
    const auto members = fx::group_members(aog);
    for (const auto& eq : enumerate_equivalents(m, aog)) {
      ++switched;
      CHECK(validate_canonical(eq).empty());
      CHECK(models_equal_mixing(m, eq, 1e-9));
      CHECK(fx::group_members(compute_aog(eq)) == members);
      CHECK(eq.unobserved().size() == m.unobserved().size());
    }
  }
  CHECK(switched > n);
}

TEST_CASE("property: switches inside direct groups keep the diagram") {
  std::size_t n = 0;
  for (std::uint64_t s = 0; n < 60; ++s) {
    CanonicalModel m;
    try {
      m = generate_model(fx::recovery_config(95000 + s));
    } catch (const GeneratorError&) {
      continue;
    }
    ++n;
    const auto before = m.edges().size();
    for (const auto& eq : enumerate_equivalents(m, compute_dog(m))) {
      CHECK(same_unlabeled_structure(m, eq));
      CHECK(eq.edges().size() == before);
    }
  }
}
