#include <cstring>
#include <string>

#include "doctest.h"
#include "udw/udw.h"

TEST_CASE("null arguments") {
    CHECK(udw_scenario_load(nullptr, nullptr) == UDW_ERR_ARGUMENT);
    CHECK(std::strlen(udw_last_error()) > 0);
    CHECK(udw_verify("bell", nullptr, nullptr, nullptr) == UDW_ERR_ARGUMENT);
    CHECK(udw_options_set_seed(nullptr, 1) == UDW_ERR_ARGUMENT);
    CHECK(std::string(udw_result_text(nullptr)).empty());
    udw_scenario_free(nullptr);
    udw_options_free(nullptr);
    udw_result_free(nullptr);
}

TEST_CASE("scenario handles") {
    udw_scenario* s = nullptr;
    CHECK(udw_scenario_parse("{\"detectors\": [}", &s) == UDW_ERR_INPUT);
    CHECK(s == nullptr);
    CHECK(std::string(udw_last_error()).find("syntax error") != std::string::npos);

    REQUIRE(udw_scenario_default(&s) == UDW_OK);
    CHECK(udw_scenario_dimension(s) == 2);
    CHECK(udw_scenario_detector_count(s) == 2);
    char buf[64];
    const double inside[] = {3.0, 2.0}, outside[] = {0.0, 0.0};
    REQUIRE(udw_classify_point(s, inside, 2, buf, sizeof buf) == UDW_OK);
    CHECK(std::string(buf) == "P+_A∩P+_B");
    REQUIRE(udw_classify_point(s, outside, 2, buf, sizeof buf) == UDW_OK);
    CHECK(std::string(buf) == "S_AB");
    CHECK(udw_classify_point(s, inside, 3, buf, sizeof buf) == UDW_ERR_INPUT);
    CHECK(udw_classify_point(s, inside, 2, buf, 2) == UDW_ERR_ARGUMENT);
    udw_scenario_free(s);
}

TEST_CASE("options validation") {
    udw_options* o = nullptr;
    REQUIRE(udw_options_new(&o) == UDW_OK);
    CHECK(udw_options_set_prescription(o, "pgm") == UDW_OK);
    CHECK(udw_options_set_prescription(o, "magic") == UDW_ERR_INPUT);
    CHECK(udw_options_set_semantics(o, "algebraic-global") == UDW_OK);
    CHECK(udw_options_set_semantics(o, "other") == UDW_ERR_INPUT);
    CHECK(udw_options_set_tol(o, -1.0) == UDW_ERR_INPUT);
    CHECK(udw_options_set_samples(o, 0) == UDW_ERR_INPUT);
    CHECK(udw_options_set_format(o, static_cast<udw_format>(7)) == UDW_ERR_INPUT);
    udw_options_free(o);
}

TEST_CASE("commands through the C API") {
    udw_options* o = nullptr;
    REQUIRE(udw_options_new(&o) == UDW_OK);
    udw_options_set_format(o, UDW_FORMAT_SUMMARY);
    udw_options_set_seed(o, 7);

    udw_result* r = nullptr;
    CHECK(udw_verify("bell", nullptr, o, &r) == UDW_OK);
    REQUIRE(r);
    CHECK(udw_result_exit_code(r) == 0);
    CHECK(std::string(udw_result_text(r)).find("chsh_before=2.828427") != std::string::npos);
    udw_result_free(r);

    CHECK(udw_verify("nonsense", nullptr, o, &r) == UDW_ERR_INPUT);
    REQUIRE(r);
    CHECK(std::string(udw_result_error(r)).find("unknown suite") != std::string::npos);
    udw_result_free(r);

    udw_scenario* s = nullptr;
    REQUIRE(udw_scenario_load(UDW_SCENARIO_DIR "/between.json", &s) == UDW_OK);
    CHECK(udw_twopoint(s, nullptr, nullptr, o, &r) == UDW_OK);
    CHECK(std::string(udw_result_text(r)).find("conflicts=1") != std::string::npos);
    udw_result_free(r);
    udw_options_set_conflicts_as_errors(o, 1);
    CHECK(udw_twopoint(s, nullptr, nullptr, o, &r) == UDW_ERR_CONFLICT);
    udw_result_free(r);
    CHECK(udw_twopoint(s, "0:1", nullptr, o, &r) == UDW_ERR_INPUT);
    udw_result_free(r);
    udw_scenario_free(s);
    udw_options_free(o);
}
