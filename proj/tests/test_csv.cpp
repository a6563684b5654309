#include <sstream>

#include <gtest/gtest.h>

#include "toxpipe/csv.hpp"

using toxpipe::csv::Reader;
using toxpipe::csv::Row;

namespace {

std::vector<Row> read_all(const std::string& text) {
  std::istringstream in(text);
  Reader reader(in);
  std::vector<Row> rows;
  Row row;
  while (reader.next(row)) rows.push_back(row);
  return rows;
}

}  // namespace

TEST(Csv, PlainRows) {
  const auto rows = read_all("a,b,c\n1,2,3\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (Row{"1", "2", "3"}));
}

TEST(Csv, QuotedCommaQuoteAndNewline) {
  const auto rows = read_all("x,\"he said \"\"hi\"\", ok\"\ny,\"two\nlines\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "he said \"hi\", ok");
  EXPECT_EQ(rows[1][1], "two\nlines");
}

TEST(Csv, CrlfAndMissingFinalNewline) {
  const auto rows = read_all("a,b\r\n1,2");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (Row{"a", "b"}));
  EXPECT_EQ(rows[1], (Row{"1", "2"}));
}

TEST(Csv, EmptyFields) {
  const auto rows = read_all(",x,\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (Row{"", "x", ""}));
}

TEST(Csv, LineNumbersFollowPhysicalLines) {
  std::istringstream in("h\n\"a\nb\"\nc\n");
  Reader reader(in);
  Row row;
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(reader.line(), 1u);
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(reader.line(), 2u);
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(reader.line(), 4u);
}

TEST(Csv, QuoteOnlyWhenNeeded) {
  EXPECT_EQ(toxpipe::csv::quote("plain"), "plain");
  EXPECT_EQ(toxpipe::csv::quote("a,b"), "\"a,b\"");
  EXPECT_EQ(toxpipe::csv::quote("say \"x\""), "\"say \"\"x\"\"\"");
  EXPECT_EQ(toxpipe::csv::quote("l1\nl2"), "\"l1\nl2\"");
}

TEST(Csv, WriteThenReadRoundTrips) {
  const Row row{"1", "with,comma", "with \"quote\"", "multi\r\nline", ""};
  std::ostringstream out;
  toxpipe::csv::write_row(out, row);
  const auto rows = read_all(out.str());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], row);
}
