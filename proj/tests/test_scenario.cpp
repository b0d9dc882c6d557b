#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "finsler/scenario.hpp"

using namespace finsler;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SCENARIOS_DIR;
const fs::path kSchemas = SCHEMAS_DIR;

fs::path temp_dir() {
    static int counter = 0;
    const fs::path p = fs::temp_directory_path() / ("finslernav-test-" + std::to_string(counter++));
    fs::create_directories(p);
    return p;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return j;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A deliberately small JSON-schema interpreter: enough of draft-07 to drive
// the published report schema (type / enum / required / properties / items).
bool conforms(const nlohmann::json& value, const nlohmann::json& schema) {
    if (schema.contains("type")) {
        const std::string t = schema["type"];
        if (t == "object" && !value.is_object()) return false;
        if (t == "array" && !value.is_array()) return false;
        if (t == "string" && !value.is_string()) return false;
        if (t == "boolean" && !value.is_boolean()) return false;
        if (t == "integer" && !value.is_number_integer()) return false;
        if (t == "number" && !value.is_number()) return false;
    }
    if (schema.contains("enum")) {
        bool hit = false;
        for (const auto& candidate : schema["enum"]) hit = hit || candidate == value;
        if (!hit) return false;
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"])
            if (!value.contains(key.get<std::string>())) return false;
    }
    if (schema.contains("properties") && value.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items())
            if (value.contains(key) && !conforms(value.at(key), sub)) return false;
    }
    if (schema.contains("items") && value.is_array()) {
        for (const auto& item : value)
            if (!conforms(item, schema["items"])) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("bundled scenarios parse and resolve every name") {
    for (const auto& entry : fs::directory_iterator(kScenarios)) {
        INFO(entry.path().string());
        CHECK_NOTHROW(ScenarioConfig::load(entry.path().string()));
    }
}

TEST_CASE("config validation rejects bad inputs at load time") {
    nlohmann::json base = read_json(kScenarios / "funk-sphere.json");
    SECTION("unknown check name") {
        nlohmann::json j = base;
        j["checks"].push_back("no-such-check");
        CHECK_THROWS_AS(ScenarioConfig::parse(j), ConfigError);
    }
    SECTION("unknown metric name") {
        nlohmann::json j = base;
        j["metric"]["name"] = "hilbert";
        CHECK_THROWS_AS(ScenarioConfig::parse(j), ConfigError);
    }
    SECTION("unknown wind kind") {
        nlohmann::json j = base;
        j["wind"]["kind"] = "tornado";
        CHECK_THROWS_AS(ScenarioConfig::parse(j), ConfigError);
    }
    SECTION("unknown field name") {
        nlohmann::json j = base;
        j["field"]["name"] = "torus";
        CHECK_THROWS_AS(ScenarioConfig::parse(j), ConfigError);
    }
    SECTION("missing schema tag") {
        nlohmann::json j = base;
        j.erase("schema");
        CHECK_THROWS_AS(ScenarioConfig::parse(j), ConfigError);
    }
    SECTION("invalid numerics") {
        nlohmann::json j = base;
        j["numerics"]["cone_margin"] = 0.9;
        CHECK_THROWS_AS(ScenarioConfig::parse(j), ConfigError);
    }
    SECTION("malformed file") {
        const fs::path dir = temp_dir();
        std::ofstream(dir / "bad.json") << "{ not json";
        CHECK_THROWS_AS(ScenarioConfig::load((dir / "bad.json").string()), ConfigError);
    }
}

TEST_CASE("verify runner") {
    ScenarioConfig cfg = ScenarioConfig::load((kScenarios / "funk-hyperplane.json").string());
    cfg.checks = {"signature", "correspondence"};
    const fs::path dir = temp_dir();
    std::ostringstream log;
    SECTION("green scenario exits zero and writes a conforming report") {
        CHECK(run_verify(cfg, dir.string(), log) == 0);
        const nlohmann::json report = read_json(dir / cfg.out_report);
        CHECK(report["pass"] == true);
        CHECK(conforms(report, read_json(kSchemas / "report.schema.json")));
        CHECK(report["results"].size() >= 2);
    }
    SECTION("reports are byte-identical across runs") {
        REQUIRE(run_verify(cfg, dir.string(), log) == 0);
        const std::string first = read_text(dir / cfg.out_report);
        REQUIRE(run_verify(cfg, dir.string(), log) == 0);
        CHECK(first == read_text(dir / cfg.out_report));
    }
    SECTION("changing the seed changes samples but not the verdict") {
        cfg.seed = 424242;
        CHECK(run_verify(cfg, dir.string(), log) == 0);
    }
}

TEST_CASE("the negative control fails loudly") {
    ScenarioConfig cfg = ScenarioConfig::load((kScenarios / "negative-control.json").string());
    const fs::path dir = temp_dir();
    std::ostringstream log;
    CHECK(run_verify(cfg, dir.string(), log) == 1);
    const nlohmann::json report = read_json(dir / cfg.out_report);
    CHECK(report["pass"] == false);
    bool saw_large_residual = false;
    for (const auto& r : report["results"]) {
        if (r["identity"] == "laplacian-correspondence-measure") {
            CHECK(r["pass"] == false);
            saw_large_residual = r["max_residual"].get<double>() > 1e-1;
        }
    }
    CHECK(saw_large_residual);
    CHECK(conforms(report, read_json(kSchemas / "report.schema.json")));
}

TEST_CASE("geodesic runner") {
    ScenarioConfig cfg = ScenarioConfig::load((kScenarios / "funk-sphere.json").string());
    const fs::path dir = temp_dir();
    std::ostringstream log;
    SECTION("the trajectory matches the exponential closed form") {
        REQUIRE(run_geodesic(cfg, dir.string(), log) == 0);
        std::ifstream in(dir / cfg.out_trajectory);
        std::string header;
        std::getline(in, header);
        CHECK(header == "t,x1,x2,v1,v2,speed,nav_x1,nav_x2,nav_dev");
        std::string line;
        double worst = 0.0;
        int rows = 0;
        while (std::getline(in, line)) {
            double t, x1, x2;
            REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x1, &x2) == 3);
            worst = std::max(worst, std::abs(x1 - (1.0 + std::exp(-t))) + std::abs(x2));
            ++rows;
        }
        CHECK(rows == 501);
        CHECK(worst < 1e-5);
    }
    SECTION("seventeen significant digits survive the round trip") {
        REQUIRE(run_geodesic(cfg, dir.string(), log) == 0);
        const std::string text = read_text(dir / cfg.out_trajectory);
        CHECK(text.find("0.99900049983337502") != std::string::npos);
    }
    SECTION("out-of-cone starts exit nonzero at time zero") {
        cfg.geo_y0 = Vec(2);
        cfg.geo_y0 << 1.0, 0.0;
        CHECK(run_geodesic(cfg, dir.string(), log) == 1);
        CHECK(log.str().find("t = 0") != std::string::npos);
    }
    SECTION("the reference column tracks non-unit initial speeds") {
        // At x0 = (3,0,0) the configured direction has metric speed 1/2; the
        // transported reference must follow the same parameterization.
        ScenarioConfig c3 = ScenarioConfig::load((kScenarios / "funk-sphere-3d.json").string());
        REQUIRE(run_geodesic(c3, dir.string(), log) == 0);
        std::ifstream in(dir / c3.out_trajectory);
        std::string line, last;
        std::getline(in, line);  // header
        while (std::getline(in, line)) last = line;
        const auto comma = last.find_last_of(',');
        CHECK(std::stod(last.substr(comma + 1)) < 1e-5);
    }
}

TEST_CASE("levelset runner") {
    ScenarioConfig cfg = ScenarioConfig::load((kScenarios / "funk-levelset.json").string());
    const fs::path dir = temp_dir();
    std::ostringstream log;
    SECTION("level radii follow the transported closed form") {
        REQUIRE(run_levelset(cfg, dir.string(), log) == 0);
        std::ifstream in(dir / cfg.out_levelset);
        std::string line;
        std::getline(in, line);
        CHECK(line == "family,level,x1,x2");
        int induced_rows = 0;
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string family, cell;
            std::getline(row, family, ',');
            std::getline(row, cell, ',');
            const double level = std::stod(cell);
            std::getline(row, cell, ',');
            const double x1 = std::stod(cell);
            std::getline(row, cell, ',');
            const double x2 = std::stod(cell);
            const double r = std::hypot(x1, x2);
            if (family == "base") {
                CHECK(r == Approx(2.0 + level).margin(1e-7));
            } else {
                ++induced_rows;
                CHECK(r == Approx(1.0 + std::exp(-level)).margin(1e-7));
            }
        }
        CHECK(induced_rows == 2 * cfg.samples);
    }
    SECTION("an unreachable level is a diagnostic failure") {
        cfg.levels = {-1.5};  // the base sphere of radius 0.5 sits outside the region
        CHECK(run_levelset(cfg, dir.string(), log) == 1);
        CHECK_FALSE(log.str().empty());
    }
}
