#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hmhf/bubble_library.hpp"
#include "hmhf/errors.hpp"

using namespace hmhf;

TEST(StandardLibrary, DegreesAndNames) {
  const auto lib = standard_library();
  ASSERT_EQ(lib.size(), 7u);
  EXPECT_EQ(lib[0].name, "canonical_k1");
  for (const auto& e : lib) {
    EXPECT_GE(e.bubble.degree(), 1);
    EXPECT_LE(e.bubble.degree(), 3);
    EXPECT_GT(e.bubble.scale(), 0.0);
  }
}

TEST(StandardLibrary, TotalEnergiesAreQuantized) {
  for (const auto& e : standard_library()) {
    const double E = bubble_disc_energy(e.bubble.map(), {e.bubble.center(), 1e7});
    EXPECT_NEAR(E / (4 * std::numbers::pi * e.bubble.degree()), 1.0, 1e-6) << e.name;
  }
}

TEST(LibraryText, RoundTripIsExact) {
  const auto lib = standard_library(Gamma0{0.02});
  std::stringstream a;
  write_library(a, lib);
  std::stringstream in(a.str());
  const auto back = read_library(in);
  ASSERT_EQ(back.size(), lib.size());
  for (std::size_t i = 0; i < lib.size(); ++i) {
    EXPECT_EQ(back[i].name, lib[i].name);
    EXPECT_EQ(back[i].bubble.map(), lib[i].bubble.map());
    EXPECT_EQ(back[i].bubble.scale(), lib[i].bubble.scale());
    EXPECT_EQ(back[i].bubble.center(), lib[i].bubble.center());
    EXPECT_EQ(back[i].bubble.gamma0(), 0.02);
  }
  std::stringstream b;
  write_library(b, back);
  EXPECT_EQ(a.str(), b.str());
}

TEST(LibraryText, MalformedInputNamesLine) {
  std::stringstream in("bubble x\ndegree one\n");
  try {
    read_library(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 35.43495390942594}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_THROW(parse_double("1.5x"), FormatError);
  EXPECT_THROW(parse_double(""), FormatError);
}
