#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "sbd/config.hpp"
#include "sbd/io.hpp"

using namespace sbd;

namespace {

Json minimal() {
  return Json::parse(R"({
    "model": {"variant": "glauber_glauber", "z_minus": 0.5, "z_plus": 0.3,
              "phi_minus": {"type": "step", "height": 1.0, "range": 0.5}},
    "torus": {"dim": 1, "side": 10.0}
  })");
}

}  // namespace

TEST(Config, SampleConfigsParse) {
  int seen = 0;
  for (const auto& e : std::filesystem::directory_iterator(SBD_CONFIG_DIR)) {
    if (e.path().extension() != ".json" || e.path().filename() == "schema.json") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++seen;
  }
  EXPECT_GE(seen, 5);
}

TEST(Config, MinimalDefaults) {
  const auto c = parse_config(minimal());
  EXPECT_EQ(c.model.name(), "glauber_glauber");
  EXPECT_EQ(c.torus.side(), 10.0);
  EXPECT_EQ(c.hierarchy.order, 3);
  EXPECT_EQ(c.simulation.replicas, 200u);
  EXPECT_EQ(c.regime_candidates().size(), 1u);
  const auto* g = c.model.get_if<GlauberGlauber>();
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->phi_minus.cutoff(), 0.5);
  EXPECT_TRUE(g->phi_plus.is_zero());
}

TEST(Config, RegimeGrid) {
  auto doc = minimal();
  doc["regime_grid"] = {{"c_minus", {1.0, 2.0, 3.0}}, {"c_plus", {0.5, 1.0}}};
  EXPECT_EQ(parse_config(doc).regime_candidates().size(), 6u);
}

TEST(Config, SchemaErrors) {
  auto unknown = minimal();
  unknown["extra"] = 1;
  EXPECT_THROW(parse_config(unknown), SchemaError);
  auto nested = minimal();
  nested["model"]["zz"] = 1;
  EXPECT_THROW(parse_config(nested), SchemaError);
  auto no_torus = minimal();
  no_torus.erase("torus");
  EXPECT_THROW(parse_config(no_torus), SchemaError);
  auto bad_type = minimal();
  bad_type["model"]["phi_minus"]["type"] = "gaussian";
  EXPECT_THROW(parse_config(bad_type), SchemaError);
  auto bad_variant = minimal();
  bad_variant["model"]["variant"] = "voter";
  EXPECT_THROW(parse_config(bad_variant), SchemaError);
  auto wrong_kind = minimal();
  wrong_kind["torus"]["side"] = "ten";
  EXPECT_THROW(parse_config(wrong_kind), SchemaError);
  auto negative = minimal();
  negative["model"]["z_minus"] = -1.0;
  EXPECT_THROW(parse_config(negative), SchemaError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), SchemaError);
}

TEST(Config, ErrorsNameThePath) {
  auto doc = minimal();
  doc["model"]["phi_minus"]["height"] = "x";
  try {
    parse_config(doc);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("phi_minus"), std::string::npos) << e.what();
  }
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = minimal();
  auto b = minimal();
  EXPECT_EQ(config_hash(a), config_hash(b));
  b["torus"]["side"] = 11.0;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Io, CsvHeaders) {
  const GridSpec grid(4, Torus(1, 4.0));
  const auto k = CorrelationTable::poisson(grid, 2, 0.5, 1.0);
  std::ostringstream os;
  write_table_csv(os, k);
  const auto text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "order,x1_0,value");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 1 + 1 + 4);

  ObservableSeries s;
  s.volume = 2.0;
  s.times = {0.0};
  s.n_plus = {1};
  s.n_minus = {3};
  std::ostringstream ss;
  write_series_csv(ss, std::span<const ObservableSeries>(&s, 1));
  EXPECT_EQ(ss.str(), "replica,t,n_plus,n_minus,density_plus,density_minus\n0,0,1,3,0.5,1.5\n");
}

TEST(Io, ReportJsonUsesSnakeCaseAndNullForInfinity) {
  ConditionReport r;
  r.a_plus = kInf;
  const auto j = to_json(r);
  EXPECT_TRUE(j["a_plus"].is_null());
  EXPECT_TRUE(j.contains("m_star_minus"));
  EXPECT_TRUE(j.contains("all_ok"));
}
