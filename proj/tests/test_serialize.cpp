#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include "sbg/serialize.hpp"

using namespace sbg;

namespace {

std::string tmp_path(const std::string& name) {
  const char* dir = std::getenv("SBG_TEST_TMP");
  return std::string(dir ? dir : ".") + "/" + name;
}

}  // namespace

TEST(EnsembleJson, RoundTrip) {
  const auto mod = ModulationSpec::cosine(32, 0.03);
  const auto ens = design_permutations(build_ensemble(32, 4, 3, 8, 11), mod,
                                       {PermutationStrategy::heuristic, 32, 0, 3});
  const auto back = ensemble_from_json(to_json(ens, mod));
  EXPECT_EQ(back.ensemble.partitions, ens.partitions);
  EXPECT_EQ(back.ensemble.permutations, ens.permutations);
  EXPECT_EQ(back.ensemble.seed, ens.seed);
  EXPECT_EQ(back.ensemble.rf_limit, 8u);
  EXPECT_EQ(back.modulation.kind(), ModulationKind::cosine);
  EXPECT_EQ(back.modulation.omega(), 0.03);
  EXPECT_EQ(assemble_matrix(back.ensemble, back.modulation).dense_row(5),
            assemble_matrix(ens, mod).dense_row(5));
}

TEST(EnsembleJson, FileRoundTrip) {
  const auto mod = ModulationSpec::linear(16);
  const auto ens = build_ensemble(16, 4, 2, 4, 9);
  const auto path = tmp_path("ensemble_roundtrip.json");
  save_ensemble(path, ens, mod);
  const auto back = load_ensemble(path);
  EXPECT_EQ(back.ensemble.partitions, ens.partitions);
  EXPECT_EQ(back.modulation.kind(), ModulationKind::linear);
  EXPECT_THROW(load_ensemble(tmp_path("does_not_exist.json")), ConfigError);
}

TEST(EnsembleJson, Rejections) {
  const auto mod = ModulationSpec::linear(8);
  auto j = to_json(build_ensemble(8, 2, 1, 4, 1), mod);

  auto bad = j;
  bad["format"] = "sbg-ensemble/9";
  EXPECT_THROW(ensemble_from_json(bad), InvalidArgument);

  bad = j;
  bad["permutations"] = {{0, 0, 1, 2, 3, 4, 5, 6}};
  EXPECT_THROW(ensemble_from_json(bad), InvalidArgument);

  bad = j;
  bad.erase("partitions");
  EXPECT_THROW(ensemble_from_json(bad), InvalidArgument);

  bad = j;
  bad["modulation"]["kind"] = "square";
  EXPECT_THROW(ensemble_from_json(bad), InvalidArgument);
}

TEST(MatrixJson, RoundTrip) {
  const auto mod = ModulationSpec::linear(12);
  const auto a = assemble_matrix(build_ensemble(12, 3, 2, 4, 2), mod);
  const auto b = matrix_from_json(to_json(a));
  ASSERT_EQ(b.rows(), a.rows());
  for (std::size_t t = 0; t < a.rows(); ++t) EXPECT_EQ(b.dense_row(t), a.dense_row(t));

  auto bad = to_json(a);
  bad["rows"].erase(0);
  EXPECT_THROW(matrix_from_json(bad), DimensionMismatch);
  bad = to_json(a);
  bad["format"] = "nope";
  EXPECT_THROW(matrix_from_json(bad), InvalidArgument);
}
