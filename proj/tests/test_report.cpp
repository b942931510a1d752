#include "lacuna/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace lacuna;

TEST(Report, FnvKnownVectors) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Report, ConfigHashIgnoresKeyOrder) {
    nlohmann::json a{{"seed", 1}, {"beta", 2.0}};
    nlohmann::json b;
    b["beta"] = 2.0;
    b["seed"] = 1;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b["seed"] = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Report, CsvQuotesSpecialFields) {
    Table t{{"name", "value"}, {}};
    t.add({"plain", "1"});
    t.add({"a,b", "say \"hi\""});
    std::ostringstream out;
    write_csv(out, t);
    EXPECT_EQ(out.str(), "name,value\r\nplain,1\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n");
    auto j = to_json(t);
    EXPECT_EQ(j[1]["name"], "a,b");
}

TEST(Report, FlatJsonCarriesVersionAndExtras) {
    ExperimentReport r;
    r.name = "demo";
    r.seed = 9;
    r.extra = {{"terms", 40}};
    auto j = to_json(r);
    EXPECT_EQ(j["seed"], 9);
    EXPECT_EQ(j["terms"], 40);
    EXPECT_EQ(j["version"], std::string(version));
    for (const auto& [k, v] : j.items()) EXPECT_FALSE(v.is_object() || v.is_array()) << k;
}

TEST(Report, ShortestDoubleRoundTrip) {
    for (double v : {0.1, 1.0 / 3, 1e-300, -2.5, 123456789.125}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.1), "0.1");
}
