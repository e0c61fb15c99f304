#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace vdfem::test;

class OracleTest : public ::testing::TestWithParam<Oracle> {};

TEST_P(OracleTest, Matches) {
  const OracleResult r = GetParam().run();
  EXPECT_TRUE(r.pass) << r.detail;
}

INSTANTIATE_TEST_SUITE_P(Derived, OracleTest, ::testing::ValuesIn(all_oracles()),
                         [](const ::testing::TestParamInfo<Oracle>& info) { return info.param.name; });
