#include <doctest.h>

#include <cmath>
#include <sstream>

#include "glycast/csv_io.hpp"
#include "glycast/errors.hpp"
#include "glycast/simulator.hpp"

using namespace glycast;

namespace {

PatientRecord small_record() {
    PatientParams params;
    Scenario sc;
    sc.days = 2;
    return simulate_patient(params, sc, 42, "p01");
}

} // namespace

TEST_CASE("csv: simulated record survives a round trip") {
    const auto r = small_record();
    std::ostringstream out;
    write_patient_csv(r, out);
    std::istringstream in(out.str());
    const auto back = read_patient_csv(in, "mem");

    CHECK(back.patient_id == r.patient_id);
    const auto* glu = r.uniform(VariableId::glucose);
    const auto* glu2 = back.uniform(VariableId::glucose);
    REQUIRE(glu2 != nullptr);
    CHECK(glu2->step_s == glu->step_s);
    REQUIRE(glu2->values.size() <= glu->values.size());

    // Compare sample-by-sample at matching timestamps.
    for (std::size_t i = 0; i < glu2->values.size(); ++i) {
        const Timestamp t = glu2->time_at(i);
        const std::size_t j = static_cast<std::size_t>((t - glu->start) / glu->step_s);
        if (is_gap(glu2->values[i])) {
            CHECK(is_gap(glu->values[j]));
        } else {
            CHECK(std::abs(glu2->values[i] - glu->values[j]) < 1e-9);
        }
    }

    const auto* bolus = r.events(VariableId::insulin_bolus);
    const auto* bolus2 = back.events(VariableId::insulin_bolus);
    REQUIRE(bolus2 != nullptr);
    REQUIRE(bolus2->events.size() == bolus->events.size());
    for (std::size_t i = 0; i < bolus->events.size(); ++i) {
        CHECK(bolus2->events[i].time == bolus->events[i].time);
        CHECK(std::abs(bolus2->events[i].value - bolus->events[i].value) < 1e-9);
    }
}

TEST_CASE("csv: gap slots are reconstructed as gaps") {
    PatientRecord r;
    r.patient_id = "p";
    r.span_start = make_timestamp(2021, 3, 1);
    r.span_end = r.span_start + 1800;
    UniformSeries glu;
    glu.variable = VariableId::glucose;
    glu.start = r.span_start;
    glu.step_s = 300;
    glu.values = {100.0, kGap, kGap, 130.0, 140.0, 150.0};
    r.series[VariableId::glucose] = glu;

    std::ostringstream out;
    write_patient_csv(r, out);
    std::istringstream in(out.str());
    const auto back = read_patient_csv(in, "mem");
    const auto* g = back.uniform(VariableId::glucose);
    REQUIRE(g != nullptr);
    CHECK(g->step_s == 300);
    REQUIRE(g->values.size() == 6);
    CHECK(g->values[0] == doctest::Approx(100.0));
    CHECK(is_gap(g->values[1]));
    CHECK(is_gap(g->values[2]));
    CHECK(g->values[3] == doctest::Approx(130.0));
}

TEST_CASE("csv: empty record writes a header-only file") {
    PatientRecord r;
    r.patient_id = "none";
    std::ostringstream out;
    write_patient_csv(r, out);
    CHECK(out.str() == "patient_id,timestamp,variable,value,unit\n");
    std::istringstream in(out.str());
    const auto back = read_patient_csv(in, "mem");
    CHECK(back.series.empty());
}

TEST_CASE("csv: unit mismatch is rejected with the line number") {
    std::istringstream in(
        "patient_id,timestamp,variable,value,unit\n"
        "p,2021-03-01T00:00:00Z,glucose,100.0,mg/dL\n"
        "p,2021-03-01T00:05:00Z,glucose,101.0,mmol/L\n");
    try {
        read_patient_csv(in, "mem");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("unit mismatch") != std::string::npos);
    }
}

TEST_CASE("csv: unknown variable names are rejected with the line number") {
    std::istringstream in(
        "patient_id,timestamp,variable,value,unit\n"
        "p,2021-03-01T00:00:00Z,blood_sugar,100.0,mg/dL\n");
    try {
        read_patient_csv(in, "mem");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("blood_sugar") != std::string::npos);
    }
}

TEST_CASE("csv: malformed rows carry line numbers") {
    std::istringstream in(
        "patient_id,timestamp,variable,value,unit\n"
        "p,2021-03-01T00:00:00Z,glucose,not_a_number,mg/dL\n");
    CHECK_THROWS_AS(read_patient_csv(in, "mem"), ParseError);

    std::istringstream bad_header("id,ts\n");
    CHECK_THROWS_AS(read_patient_csv(bad_header, "mem"), ParseError);

    std::istringstream mixed(
        "patient_id,timestamp,variable,value,unit\n"
        "p,2021-03-01T00:00:00Z,glucose,100.0,mg/dL\n"
        "q,2021-03-01T00:05:00Z,glucose,100.0,mg/dL\n");
    CHECK_THROWS_AS(read_patient_csv(mixed, "mem"), ParseError);
}

TEST_CASE("timestamp: RFC 3339 round trip and rejection") {
    const Timestamp t = make_timestamp(2021, 3, 1, 8, 5, 0);
    CHECK(format_rfc3339(t) == "2021-03-01T08:05:00Z");
    CHECK(parse_rfc3339("2021-03-01T08:05:00Z") == t);
    CHECK_THROWS_AS(parse_rfc3339("2021-03-01 08:05:00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rfc3339("2021-03-01T08:05:00+02:00"), std::invalid_argument);
    CHECK(parse_rfc3339(format_rfc3339({0})).sec == 0);
    CHECK(format_rfc3339({1614556800}) == "2021-03-01T00:00:00Z");
}
