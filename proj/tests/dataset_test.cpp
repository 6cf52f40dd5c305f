#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "memsnn/dataset.hpp"

using namespace memsnn;

namespace {

std::string data_path(const char* name) { return std::string(MEMSNN_DATA_DIR) + "/" + name; }

std::map<int, std::size_t> counts(const Dataset& d) {
  std::map<int, std::size_t> m;
  for (const auto& s : d) ++m[s.label];
  return m;
}

DigitSample make(int label, int fill) {
  DigitSample s;
  s.pixels.fill(fill);
  s.label = label;
  return s;
}

}  // namespace

TEST(Optdigits, TrainingClassCounts) {
  const auto d = order_for_training(load_optdigits(data_path("optdigits.tra")), {0, 1, 2, 7});
  const auto c = counts(d);
  EXPECT_EQ(c.at(0), 376u);
  EXPECT_EQ(c.at(1), 389u);
  EXPECT_EQ(c.at(2), 380u);
  EXPECT_EQ(c.at(7), 387u);
  EXPECT_EQ(c.size(), 4u);
}

TEST(Optdigits, TestClassCounts) {
  const auto d = order_for_training(load_optdigits(data_path("optdigits.tes")), {0, 1, 2, 7});
  const auto c = counts(d);
  EXPECT_EQ(c.at(0), 178u);
  EXPECT_EQ(c.at(1), 182u);
  EXPECT_EQ(c.at(2), 177u);
  EXPECT_EQ(c.at(7), 179u);
}

TEST(Optdigits, ParseErrorsCarryLineNumbers) {
  std::string good;
  for (int i = 0; i < 64; ++i) good += "0,";
  good += "3\n";
  std::string short_line;
  for (int i = 0; i < 63; ++i) short_line += "0,";
  short_line += "3\n";
  std::istringstream is(good + short_line);
  try {
    parse_optdigits(is, "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Parse);
    EXPECT_NE(std::string(e.what()).find("mem:2"), std::string::npos);
  }
  std::istringstream bad_pixel("17" + good.substr(1));
  EXPECT_THROW(parse_optdigits(bad_pixel), Error);
  std::istringstream bad_label(good.substr(0, good.size() - 2) + "10\n");
  EXPECT_THROW(parse_optdigits(bad_label), Error);
  EXPECT_THROW(load_optdigits("/nonexistent/optdigits.tra"), Error);
}

TEST(Optdigits, WriteParseRoundTrip) {
  Dataset d{make(3, 5), make(7, 16)};
  d[0].pixels[10] = 12;
  std::ostringstream os;
  write_optdigits(os, d);
  std::istringstream is(os.str());
  EXPECT_EQ(parse_optdigits(is), d);
}

TEST(Binarize, ThresholdBoundary) {
  EXPECT_TRUE(binarize(make(0, 0)).empty());
  auto s = make(0, 0);
  s.pixels[3] = 7;
  s.pixels[4] = 6;
  EXPECT_EQ(binarize(s), std::vector<std::size_t>{3});
  EXPECT_EQ(binarize(make(0, 0), 0).size(), 64u);
}

TEST(Ordering, TrainingOrderPreservesFileSequence) {
  Dataset d{make(1, 1), make(5, 2), make(0, 3), make(1, 4), make(7, 5)};
  const auto f = order_for_training(d, {0, 1, 7});
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0].pixels[0], 1);
  EXPECT_EQ(f[1].pixels[0], 3);
  EXPECT_EQ(f[2].pixels[0], 4);
  EXPECT_EQ(f[3].pixels[0], 5);
  EXPECT_TRUE(order_for_training(d, {}).empty());
  EXPECT_EQ(order_for_training(d, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), d);
}

TEST(Ordering, ClassByClassBlocks) {
  const auto d = order_class_by_class(load_optdigits(data_path("optdigits.tes")), {0, 1, 2, 7}, 20);
  ASSERT_EQ(d.size(), 80u);
  const int expect[4] = {0, 1, 2, 7};
  for (std::size_t k = 0; k < 80; ++k) EXPECT_EQ(d[k].label, expect[k / 20]);
  Dataset small{make(1, 0)};
  EXPECT_THROW(order_class_by_class(small, {1}, 2), Error);
  EXPECT_TRUE(order_class_by_class(small, {1}, 0).empty());
}

TEST(ClassMean, Examples) {
  auto a = make(4, 0);
  for (std::size_t i = 0; i < 32; ++i) a.pixels[i] = 16;
  const auto single = class_mean_bitmap({a}, 4);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(single[i], i < 32 ? 1.0 : 0.0);
  auto b = make(4, 16);
  for (std::size_t i = 0; i < 32; ++i) b.pixels[i] = 0;
  const auto both = class_mean_bitmap({a, b}, 4);
  for (double m : both) EXPECT_EQ(m, 0.5);
  EXPECT_THROW(class_mean_bitmap({a}, 3), Error);
}

TEST(ClassMapTest, SortedOutputs) {
  ClassMap m({7, 0, 2, 1, 2});
  EXPECT_EQ(m.size(), 4u);
  EXPECT_EQ(m.output_of(7), 3u);
  EXPECT_EQ(m.class_of(2), 2);
  EXPECT_THROW(m.output_of(5), Error);
  EXPECT_THROW(ClassMap({10}), Error);
}
