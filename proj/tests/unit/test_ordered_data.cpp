#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "medpoc/ordered_data.hpp"

using namespace medpoc;

namespace {

Dataset parse(const std::string& text, Schema s = {}) {
  std::istringstream in(text);
  return load_dataset(in, s);
}

}  // namespace

TEST(OrderedValue, RejectsNanAndFoldsNegativeZero) {
  EXPECT_THROW(OrderedValue(std::nan("")), InvalidEvidenceError);
  EXPECT_EQ(OrderedValue(-0.0), OrderedValue(0.0));
  EXPECT_FALSE(std::signbit(OrderedValue(-0.0).value()));
  EXPECT_LT(OrderedValue(-1.0), OrderedValue(2.5));
}

TEST(Interval, ValidationAndMembership) {
  EXPECT_THROW(Interval(OrderedValue(2.0), OrderedValue(1.0), true), InvalidEvidenceError);
  EXPECT_THROW(Interval(OrderedValue(1.0), OrderedValue(1.0), false), InvalidEvidenceError);
  const Interval half(OrderedValue(1.5), OrderedValue(2.5), false);
  EXPECT_TRUE(half.contains(1.5));
  EXPECT_TRUE(half.contains(2.0));
  EXPECT_FALSE(half.contains(2.5));
  EXPECT_FALSE(half.contains(1.0));
  const Interval closed(OrderedValue(1.5), OrderedValue(2.5), true);
  EXPECT_TRUE(closed.contains(2.5));
  const Interval full = Interval::full();
  EXPECT_TRUE(full.is_full());
  EXPECT_EQ(full.lower_threshold(), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(full.upper_threshold(), std::numeric_limits<double>::infinity());
  EXPECT_TRUE(full.contains(-1e300));
  EXPECT_TRUE(Interval::point(3.0).contains(3.0));
  // An open upper bound at infinity is the only form: closedness is dropped.
  EXPECT_FALSE(Interval(OrderedValue(0.0), std::nullopt, true).upper_closed());
}

TEST(Evidence, KindsAndDroppingTheMediator) {
  auto e = Evidence::with_mediator_value(OrderedValue(1.0), OrderedValue(0.0), Interval::point(1.0));
  EXPECT_EQ(e.kind(), EvidenceKind::mediator_value);
  EXPECT_STREQ(evidence_kind_name(e.kind()), "E");
  auto d = e.without_mediator();
  EXPECT_EQ(d.kind(), EvidenceKind::outcome_only);
  EXPECT_FALSE(d.m_star().has_value());
  auto mi = Evidence::with_mediator_interval(OrderedValue(0.0), Interval::full(), Interval::full());
  EXPECT_STREQ(evidence_kind_name(mi.kind()), "E''");
  EXPECT_TRUE(mi.m_interval().has_value());
}

TEST(Csv, ParsesRolesInAnyColumnOrder) {
  const auto d = parse("id,y,m,x\n1,0,1,1\n2,1,0,0\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.x()[0], 1.0);
  EXPECT_EQ(d.m()[0], 1.0);
  EXPECT_EQ(d.y()[1], 1.0);
}

TEST(Csv, HandlesBomQuotesCrlfAndBlankLines) {
  const auto d = parse("\xEF\xBB\xBF\"x\",m,y\r\n\"1\",0,2.5\r\n\r\n0,1,-3\r\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.y()[0], 2.5);
  EXPECT_EQ(d.y()[1], -3.0);
}

TEST(Csv, ReportsLineOfBadCell) {
  try {
    parse("x,m,y\n1,0,1\n1,zz,1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
  EXPECT_THROW(parse("x,m,y\n1,0\n"), ParseError);
  EXPECT_THROW(parse("x,m,y\n1,0,nan\n"), ParseError);
}

TEST(Csv, SchemaAndEmptyErrors) {
  EXPECT_THROW(parse("x,m\n1,0\n"), SchemaError);
  EXPECT_THROW(parse("x,m,y\n"), EmptyDataError);
  EXPECT_THROW(parse(""), EmptyDataError);
  Schema s;
  s.covariates = {"c"};
  EXPECT_THROW(parse("x,m,y\n1,0,1\n", s), SchemaError);
  EXPECT_THROW(load_dataset_file("/nonexistent/file.csv", Schema{}), UsageError);
}

TEST(Csv, WriteThenReadRoundTrips) {
  Schema s;
  s.x = "treat";
  s.covariates = {"age"};
  Dataset d(s, {0, 1, 1}, {0.1, 1.0 / 3.0, 2}, {1e-300, -0.0, 123456789.125}, {{3, 4, 3}});
  std::ostringstream out;
  write_csv(out, d);
  std::istringstream in(out.str());
  const Dataset back = load_dataset(in, s);
  EXPECT_EQ(back, d);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "treat,m,y,age");
}

TEST(Dataset, ValidatesColumns) {
  EXPECT_THROW(Dataset(Schema{}, {1, 2}, {1}, {1, 2}), SchemaError);
  EXPECT_THROW(Dataset(Schema{}, {}, {}, {}), EmptyDataError);
  EXPECT_THROW(Dataset(Schema{}, {1}, {std::nan("")}, {1}), SchemaError);
}

TEST(Dataset, SelectAndStratify) {
  Schema s;
  s.covariates = {"c"};
  Dataset d(s, {0, 1, 0, 1}, {0, 0, 1, 1}, {1, 2, 3, 4}, {{0, 1, 1, 0}});
  const std::size_t rows[] = {3, 3, 0};
  const Dataset sel = d.select(rows);
  ASSERT_EQ(sel.size(), 3u);
  EXPECT_EQ(sel.y()[0], 4.0);
  EXPECT_EQ(sel.y()[2], 1.0);

  const double one[] = {1.0};
  const Dataset st = stratify(d, one);
  ASSERT_EQ(st.size(), 2u);
  EXPECT_EQ(st.y()[0], 2.0);
  EXPECT_EQ(st.y()[1], 3.0);
  const double none[] = {7.0};
  EXPECT_THROW(stratify(d, none), PositivityError);
  const double two[] = {1.0, 2.0};
  EXPECT_THROW(stratify(d, two), SchemaError);
  EXPECT_EQ(stratify(d, {}), d);
  EXPECT_EQ(d.treatment_support(), (std::vector<double>{0, 1}));
}

TEST(Numbers, FormatAndParse) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-2.0), "-2");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  for (double v : {1.0 / 3.0, 1e-310, 6.02214076e23, -0.5}) {
    EXPECT_EQ(*parse_number(format_number(v)), v);
  }
  EXPECT_EQ(*parse_number(" +2.5 "), 2.5);
  EXPECT_TRUE(std::isinf(*parse_number("-inf")));
  EXPECT_FALSE(parse_number("nan").has_value());
  EXPECT_FALSE(parse_number("1.5x").has_value());
  EXPECT_FALSE(parse_number("").has_value());
}

TEST(Errors, StableKindNames) {
  EXPECT_STREQ(error_kind_name(ErrorKind::positivity), "positivity");
  EXPECT_STREQ(error_kind_name(ErrorKind::invalid_evidence), "invalid-evidence");
  EXPECT_STREQ(error_kind_name(ErrorKind::usage), "usage");
}
