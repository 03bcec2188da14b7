#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sagda/rng.hpp"
#include "sagda/schema_io.hpp"
#include "sagda/table.hpp"

using namespace sagda;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    auto p = fs::temp_directory_path() / ("sagda_test_" + name);
    std::error_code ec;
    fs::remove(p, ec);
    return p;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool tables_equal(const table& a, const table& b) {
    if (a.n_cols() != b.n_cols() || a.n_rows() != b.n_rows()) return false;
    for (size_t i = 0; i < a.n_cols(); ++i) {
        const column& ca = a.columns()[i];
        const column& cb = b.columns()[i];
        if (ca.name != cb.name || ca.type != cb.type) return false;
        if (ca.data != cb.data) return false;
    }
    return true;
}

// Random table generator for round-trip property tests.
table random_table(rng& r) {
    const size_t nrows = r.uniform_index(8);
    const size_t ncols = 1 + r.uniform_index(4);
    table t;
    for (size_t c = 0; c < ncols; ++c) {
        const std::string name = "col" + std::to_string(c);
        switch (r.uniform_index(4)) {
            case 0: {
                std::vector<double> v;
                for (size_t i = 0; i < nrows; ++i) v.push_back(r.normal(0, 100));
                t.add_column(float_column(name, std::move(v), "kg"));
                break;
            }
            case 1: {
                std::vector<int64_t> v;
                for (size_t i = 0; i < nrows; ++i)
                    v.push_back(static_cast<int64_t>(r.uniform_index(1000)) - 500);
                t.add_column(int_column(name, std::move(v)));
                break;
            }
            case 2: {
                // Deliberately hostile category values: commas, quotes, numbers.
                const char* pool[] = {"plain", "a,b", "say \"hi\"", "42", "", "x\ny"};
                std::vector<std::string> v;
                for (size_t i = 0; i < nrows; ++i) v.push_back(pool[r.uniform_index(6)]);
                t.add_column(category_column(name, std::move(v)));
                break;
            }
            default: {
                std::vector<date> v;
                for (size_t i = 0; i < nrows; ++i)
                    v.push_back(from_epoch_days(static_cast<int64_t>(r.uniform_index(40000))));
                t.add_column(date_column(name, std::move(v)));
                break;
            }
        }
    }
    return t;
}

}  // namespace

TEST_CASE("read_csv infers int64 and category dtypes") {
    auto p = temp_file("infer.csv");
    write_text(p, "a,b\n1,x\n2,y\n");
    table t = read_csv(p);
    REQUIRE(t.n_rows() == 2);
    REQUIRE(t.col("a").type == dtype::int64);
    REQUIRE(t.ints("a") == std::vector<int64_t>{1, 2});
    REQUIRE(t.col("b").type == dtype::category);
    REQUIRE(t.cats("b") == std::vector<std::string>{"x", "y"});
}

TEST_CASE("header-only file yields zero rows with all columns") {
    auto p = temp_file("header_only.csv");
    write_text(p, "a,b\n");
    table t = read_csv(p);
    REQUIRE(t.n_rows() == 0);
    REQUIRE(t.n_cols() == 2);
}

TEST_CASE("ragged rows are rejected") {
    auto p = temp_file("ragged.csv");
    write_text(p, "a,b\n1,2,3\n");
    REQUIRE_THROWS_MATCHES(read_csv(p), error, Catch::Matchers::MessageMatches(
                                                   Catch::Matchers::ContainsSubstring(
                                                       "MalformedCsv")));
}

TEST_CASE("duplicate header is rejected") {
    auto p = temp_file("dup.csv");
    write_text(p, "a,a\n1,2\n");
    REQUIRE_THROWS_AS(read_csv(p), error);
}

TEST_CASE("float and date inference") {
    auto p = temp_file("floatdate.csv");
    write_text(p, "x,d\n1.5,2020-01-01\n2.25,2020-01-02\n");
    table t = read_csv(p);
    REQUIRE(t.col("x").type == dtype::float64);
    REQUIRE(t.col("d").type == dtype::date);
    REQUIRE(t.dates("d")[1] == date{2020, 1, 2});
}

TEST_CASE("schema forces dtypes and missing numeric cells error out") {
    auto p = temp_file("forced.csv");
    write_text(p, "x\n1\n2\n");
    schema s{{"x", {dtype::float64, "mm"}}};
    table t = read_csv(p, s);
    REQUIRE(t.col("x").type == dtype::float64);
    REQUIRE(t.col("x").units == "mm");

    auto p2 = temp_file("missing.csv");
    write_text(p2, "x\n1\n\n");
    REQUIRE_THROWS_AS(read_csv(p2, s), error);
}

TEST_CASE("write_csv emits only the header for an empty table") {
    table t;
    t.add_column(float_column("a", {}));
    t.add_column(category_column("b", {}));
    auto p = temp_file("empty_out.csv");
    write_csv(t, p);
    REQUIRE(read_text(p) == "a,b\n");
}

TEST_CASE("floats round-trip bit-exactly through csv") {
    table t;
    t.add_column(float_column("x", {0.1, 1.0 / 3.0, 1e-8, 2.0, -1234.5678e21}));
    auto p = temp_file("floats.csv");
    write_csv(t, p);
    table back = read_csv(p);
    REQUIRE(back.col("x").type == dtype::float64);
    for (size_t i = 0; i < 5; ++i) {
        REQUIRE(back.floats("x")[i] == t.floats("x")[i]);  // bit-identical
    }
}

TEST_CASE("category fields with commas and quotes are RFC 4180 quoted") {
    table t;
    t.add_column(category_column("c", {"a,b", "say \"hi\"", "plain"}));
    auto p = temp_file("quoted.csv");
    write_csv(t, p);
    REQUIRE(read_text(p) == "c\n\"a,b\"\n\"say \"\"hi\"\"\"\nplain\n");
    table back = read_csv(p);
    REQUIRE(back.cats("c") == t.cats("c"));
}

TEST_CASE("csv round-trip identity over random tables (schema-forced reread)") {
    rng r(2024);
    for (int rep = 0; rep < 40; ++rep) {
        table t = random_table(r);
        auto p = temp_file("prop.csv");
        auto ps = temp_file("prop.schema.json");
        write_csv(t, p);
        write_schema_json(t, ps);
        table back = read_csv(p, read_schema_json(ps));
        REQUIRE(tables_equal(t, back));
    }
}

TEST_CASE("schema sidecar round-trips dtypes and units") {
    table t;
    t.add_column(float_column("rain", {1.0}, "mm"));
    t.add_column(date_column("day", {date{2020, 5, 1}}));
    auto p = temp_file("sidecar.json");
    write_schema_json(t, p);
    schema s = read_schema_json(p);
    REQUIRE(s.at("rain").type == dtype::float64);
    REQUIRE(s.at("rain").units == "mm");
    REQUIRE(s.at("day").type == dtype::date);
}

TEST_CASE("filter_rows selects the low quartile via quantile_ref") {
    table t;
    t.add_column(float_column("yield", {1, 2, 3, 4}));
    // Q1 (type-7) of [1,2,3,4] is 1.75; rows with yield <= 1.75 -> just 1
    table low = filter_rows(t, {{"yield", cmp_op::le, quantile_ref{0.25}}});
    REQUIRE(low.n_rows() == 1);
    REQUIRE(low.floats("yield")[0] == 1.0);
}

TEST_CASE("filter_rows edge cases") {
    table t;
    t.add_column(float_column("x", {1, 2, 3}));
    t.add_column(category_column("s", {"a", "b", "a"}));

    REQUIRE(filter_rows(t, {{"x", cmp_op::gt, 99.0}}).n_rows() == 0);
    REQUIRE_THROWS_AS(filter_rows(t, {{"nope", cmp_op::eq, 1.0}}), error);
    REQUIRE_THROWS_AS(filter_rows(t, {{"s", cmp_op::eq, 1.0}}), error);

    // empty predicate is the identity
    REQUIRE(tables_equal(filter_rows(t, {}), t));

    // composition == conjunction
    table lhs = filter_rows(filter_rows(t, {{"x", cmp_op::ge, 2.0}}),
                            {{"s", cmp_op::eq, std::string("a")}});
    table rhs = filter_rows(
        t, {{"x", cmp_op::ge, 2.0}, {"s", cmp_op::eq, std::string("a")}});
    REQUIRE(tables_equal(lhs, rhs));
    REQUIRE(lhs.n_rows() == 1);
    REQUIRE(lhs.floats("x")[0] == 3.0);
}

TEST_CASE("filter_rows on date and int columns") {
    table t;
    t.add_column(date_column("d", {date{2019, 1, 1}, date{2020, 6, 1}}));
    t.add_column(int_column("n", {5, 10}));
    REQUIRE(filter_rows(t, {{"d", cmp_op::ge, date{2020, 1, 1}}}).n_rows() == 1);
    REQUIRE(filter_rows(t, {{"n", cmp_op::lt, int64_t{10}}}).n_rows() == 1);
    // numeric literal against int column is fine too
    REQUIRE(filter_rows(t, {{"n", cmp_op::le, 7.5}}).n_rows() == 1);
}

TEST_CASE("table invariants are enforced") {
    table t;
    t.add_column(float_column("a", {1, 2}));
    REQUIRE_THROWS_AS(t.add_column(float_column("a", {3, 4})), error);
    REQUIRE_THROWS_AS(t.add_column(float_column("", {3, 4})), error);
    REQUIRE_THROWS_AS(t.add_column(float_column("b", {3})), error);
}

TEST_CASE("take preserves order and schema") {
    table t;
    t.add_column(int_column("i", {10, 20, 30}));
    std::vector<size_t> rows{2, 0};
    table sub = t.take(rows);
    REQUIRE(sub.ints("i") == std::vector<int64_t>{30, 10});
}
