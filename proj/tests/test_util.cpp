#include <doctest.h>

#include <sstream>

#include "txflow/amount.hpp"
#include "txflow/csv.hpp"
#include "txflow/error.hpp"
#include "txflow/matrix_io.hpp"
#include "txflow/timeutil.hpp"

using namespace txflow;

TEST_SUITE("util") {

TEST_CASE("amounts parse exactly to satoshi") {
    CHECK(Amount::parse("0.7").satoshi() == 70'000'000);
    CHECK(Amount::parse("3").satoshi() == 300'000'000);
    CHECK(Amount::parse("0.00000001").satoshi() == 1);
    CHECK(Amount::parse(".5").satoshi() == 50'000'000);
    CHECK((Amount::parse("0.1") + Amount::parse("0.2")) == Amount::parse("0.3"));
    CHECK(Amount::parse("0.10").to_string() == "0.1");
    CHECK(Amount::parse("12").to_string() == "12");
    CHECK_THROWS_AS(Amount::parse("-1"), DataError);
    CHECK_THROWS_AS(Amount::parse("0.000000001"), DataError);
    CHECK_THROWS_AS(Amount::parse("1e3"), DataError);
    CHECK_THROWS_AS(Amount::parse(""), DataError);
}

TEST_CASE("timestamps are UTC only") {
    const auto t = parse_timestamp("2019-09-01T13:30:00Z");
    CHECK(format_timestamp(t) == "2019-09-01T13:30:00Z");
    CHECK(parse_timestamp("2019-09-01 13:30:00+00:00") == t);
    CHECK(parse_timestamp("2019-09-01T13:30:00.75Z") == t);
    CHECK(utc_hour(t) == 13);
    CHECK_THROWS_AS(parse_timestamp("2019-09-01T13:30:00+02:00"), DataError);
    CHECK_THROWS_AS(parse_timestamp("2019-13-01T00:00:00Z"), DataError);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), DataError);
}

TEST_CASE("periods are half-open calendar intervals") {
    const auto sep = Period::month(2019, 9);
    CHECK(sep.label() == "2019-09");
    CHECK(sep.days().size() == 30);
    CHECK(sep.contains(parse_timestamp("2019-09-30T23:59:59Z")));
    CHECK_FALSE(sep.contains(parse_timestamp("2019-10-01T00:00:00Z")));
    CHECK(sep.aligned_to(TimeScale::Month));
    CHECK_FALSE(sep.aligned_to(TimeScale::Year));

    const auto months = periods_between("2019-11", "2020-02", TimeScale::Month);
    REQUIRE(months.size() == 4);
    CHECK(months[1].label() == "2019-12");
    CHECK(months[2].label() == "2020-01");
    CHECK(Period::month(2020, 2).days().size() == 29);
    CHECK(parse_period("2019-01-15", TimeScale::Day).label() == "2019-01-15");
    CHECK_THROWS(periods_between("2019-05", "2019-01", TimeScale::Month));
}

TEST_CASE("csv helpers") {
    const auto f = csv::split_line(R"(a,"b,c",,"d""e")");
    REQUIRE(f.size() == 4);
    CHECK(f[1] == "b,c");
    CHECK(f[2].empty());
    CHECK(f[3] == "d\"e");
    CHECK(csv::quote("x,y") == "\"x,y\"");
    CHECK(csv::quote("plain") == "plain");
    CHECK(csv::format_double(0.1 + 0.2) == "0.3");
    CHECK(csv::format_double(-0.0) == "0");
    CHECK(csv::format_double(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("labelled matrix csv round trip") {
    LabeledMatrix m{{"a", "b"}, {"x", "y", "z"}, Eigen::MatrixXd(2, 3)};
    m.values << 0, 3, 0.25, 1, 0, 1e-5;
    std::stringstream ss;
    write_matrix_csv(ss, m);
    CHECK(ss.str().rfind(",x,y,z\na,0,3,0.25\n", 0) == 0);
    const auto back = parse_matrix_csv(ss);
    CHECK(back.row_ids == m.row_ids);
    CHECK(back.col_ids == m.col_ids);
    CHECK(back.values.isApprox(m.values));

    std::stringstream bad(",x\na,1,2\n");
    CHECK_THROWS_AS(parse_matrix_csv(bad), DataError);
}

}
