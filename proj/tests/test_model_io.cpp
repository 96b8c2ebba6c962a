#include <doctest.h>

#include <json.hpp>

#include "hpg/cloning.hpp"
#include "hpg/error.hpp"
#include "hpg/model_io.hpp"
#include "support/oracles.hpp"

using namespace hpg;

namespace {

HpgModel worked_model(double alpha = 0.0) {
  const auto log = load_sessions(HPG_TEST_DATA_DIR "/worked.txt");
  return build_first_order(count_ngrams(log), log.pages, alpha);
}

std::string schema_error(const std::string& text) {
  try {
    import_model(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("json round trip") {
  for (double alpha : {0.0, 0.3}) {
    const auto m = worked_model(alpha);
    CHECK(import_model(export_model(m, ExportFormat::Json)) == m);
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto log = testing::small_instance(seed);
    const auto ngrams = count_ngrams(log);
    const auto cloned =
        apply_dynamic_clustering(build_first_order(ngrams, log.pages, 0.2), ngrams, CloneConfig{0.0, 0.0}).model;
    CHECK(import_model(export_model(cloned, ExportFormat::Json)) == cloned);
  }
}

TEST_CASE("json layout") {
  const auto doc = nlohmann::json::parse(export_model(worked_model(), ExportFormat::Json));
  CHECK(doc["format_version"] == kModelFormatVersion);
  CHECK(doc["states"].size() == 8);
  CHECK(doc["links"].size() == 10);
  CHECK(doc["states"][0]["kind"] == "start");
  CHECK(doc["states"][1]["page"].is_null());
  CHECK(doc["states"][2]["page"] == "A1");
}

TEST_CASE("dot export labels links with count and probability") {
  const std::string dot = export_model(worked_model(), ExportFormat::Dot);
  CHECK(dot.rfind("digraph hpg {", 0) == 0);
  CHECK(dot.find("[label=\"3 (0.375)\"]") != std::string::npos);
  CHECK(dot.find("[label=\"4 (0.5)\"]") != std::string::npos);
  CHECK(dot.find("doublecircle") != std::string::npos);
}

TEST_CASE("empty model cannot be exported") {
  CHECK_THROWS_AS(export_model(HpgModel{}, ExportFormat::Json), ParameterError);
}

TEST_CASE("schema errors name the offending path") {
  auto doc = nlohmann::json::parse(export_model(worked_model(), ExportFormat::Json));

  auto bad = doc;
  bad["links"][3]["weight"] = -1;
  CHECK(schema_error(bad.dump()).rfind("/links/3/weight", 0) == 0);

  bad = doc;
  bad["links"][0].erase("to");
  CHECK(schema_error(bad.dump()).rfind("/links/0/to", 0) == 0);

  bad = doc;
  bad["format_version"] = 99;
  CHECK(schema_error(bad.dump()).rfind("/format_version", 0) == 0);

  bad = doc;
  bad["states"][4]["id"] = 7;
  CHECK(schema_error(bad.dump()).rfind("/states/4/id", 0) == 0);

  bad = doc;
  bad["links"][0]["to"] = 0;
  CHECK(schema_error(bad.dump()).rfind("/links/0", 0) == 0);

  CHECK(schema_error("{not json").rfind("/", 0) == 0);
  CHECK(schema_error("[]") != "");
}

TEST_CASE("missing model file") {
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), std::ios_base::failure);
}
